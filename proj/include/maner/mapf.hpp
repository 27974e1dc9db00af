#pragma once

#include <climits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "maner/geometry.hpp"
#include "maner/heatmap.hpp"
#include "maner/planning_grid.hpp"
#include "maner/propose.hpp"
#include "maner/world.hpp"

namespace maner {

struct Waypoint {
  Vec2 position;
  double time = 0.0;
  /// Goal arrival (pick or place); smoothing never removes it.
  bool hold = false;
};

/// Piecewise-linear trajectory. Before the first waypoint and after the last one the
/// agent rests at the respective endpoint.
struct TimedPath {
  int agent_id = -1;
  double radius = 0.2;
  std::vector<Waypoint> waypoints;
  double pick_time = -1.0;   // end of the pick dwell, -1 when there is none
  double place_time = -1.0;  // end of the place dwell

  double total_length() const;
  double total_time() const;
  Vec2 position_at(double t) const;
};

/// A motionless body for the whole horizon.
TimedPath stationary_path(int agent_id, Vec2 position, double radius);

/// Time is discretized in ticks; a straight move between neighbouring cell centers takes
/// ceil(cell / (speed * tick)) ticks, a diagonal ceil(sqrt(2) * cell / (speed * tick)).
struct MotionModel {
  double speed = 0.3;
  double tick = 0.05;
  double dwell = 1.0;

  int straight_ticks(double cell) const;
  int diagonal_ticks(double cell) const;
  int dwell_ticks() const;
};

/// Maximal run of ticks [start, end] during which an agent may rest at a cell.
struct SafeInterval {
  Cell cell;
  double start = 0.0;
  double end = 0.0;  // +inf when the interval never closes
};

struct SippGoal {
  Cell cell;
  int dwell_ticks = 0;
};

struct SippOptions {
  bool smooth = true;
  int max_expansions = 200000;
};

struct SippResult {
  TimedPath path;
  /// Arrival tick at each goal (before its dwell).
  std::vector<int> arrival_ticks;
};

/// Safe intervals of `cell` for an agent of `radius` among `obstacles`. A tick k is safe
/// when the agent resting at the cell center over [k, k+1] keeps a distance of at least
/// radius + obstacle radius from every obstacle.
std::vector<SafeInterval> safe_intervals(const PlanningGrid& grid, Cell cell, double radius,
                                         const std::vector<TimedPath>& obstacles,
                                         const MotionModel& motion);

/// Time-optimal visit of the goals in order under the 8-connected move + wait model,
/// resting at the last goal forever afterwards. nullopt when no plan exists within the
/// expansion budget.
std::optional<SippResult> sipp_plan(const PlanningGrid& grid, Cell start,
                                    const std::vector<SippGoal>& goals,
                                    const std::vector<TimedPath>& obstacles, double radius,
                                    const MotionModel& motion, const SippOptions& options = {});

/// True when a body of `radius` moving linearly from a (at t0) to b (at t1) keeps clear
/// of every obstacle.
bool segment_clear(Vec2 a, double t0, Vec2 b, double t1, double radius,
                   const std::vector<TimedPath>& obstacles);

/// Line-of-sight shortcutting between anchors. Never increases length or duration.
TimedPath smooth_path(const TimedPath& path, const PlanningGrid& grid,
                      const std::vector<TimedPath>& obstacles, const MotionModel& motion);

struct PlanRequest {
  int agent_id = 0;
  int object_id = -1;
  Vec2 pick_position;
  Vec2 place_position;
  int priority = 0;
};

struct MapfOptions {
  MotionModel motion;
  SippOptions sipp;
  int patches = 24;
  int max_permutations = 6;
  double tolerance = 0.1;
};

struct JointPlan {
  std::vector<TimedPath> paths;  // one per request, in request order
  double total_time = 0.0;       // F: sum of agent durations
  double makespan = 0.0;
  double total_length = 0.0;
};

/// Prioritized planning in ascending priority. Each agent travels to the cell holding
/// its object, dwells, carries it to the cell of the place position and dwells again.
/// Higher-priority agents avoid the start positions of lower-priority ones; agents
/// without a request are stationary obstacles for all.
std::optional<JointPlan> plan_joint(const Scene& scene, const std::vector<PlanRequest>& requests,
                                    const MapfOptions& options = {});

struct RegionSelection {
  std::vector<int> chosen;  // candidate index per pair
  std::vector<Vec2> regions;
  int on_target = 0;
  JointPlan plan;
};

/// True when `place` lies within tolerance of a class target of `object` that is not
/// held by an object staying put this step.
bool region_on_target(const Scene& scene, const Scene& target, int object_id, Vec2 place,
                      const std::vector<int>& moving_objects, double tolerance);

/// Enumerates candidate combinations (and, for combinations infeasible in the default
/// order, further priority orders). Ranks by on-target count, then F. nullopt when no
/// combination is feasible.
std::optional<RegionSelection> select_regions(
    const Scene& scene, const Scene& target, const std::vector<PickAssignment>& pairs,
    const std::vector<std::vector<RegionCandidate>>& candidates, const MapfOptions& options = {});

nlohmann::json path_to_json(const TimedPath& path);
TimedPath path_from_json(const nlohmann::json& j);

}  // namespace maner
