#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maner/heatmap.hpp"
#include "maner/mapf.hpp"
#include "maner/propose.hpp"
#include "maner/world.hpp"

namespace maner {

struct ActionTriple {
  int agent_id = 0;
  int object_id = 0;
  Vec2 region;
};

struct StepRecord {
  int t = 0;
  std::vector<ActionTriple> triples;
  std::vector<TimedPath> paths;
  double step_F = 0.0;
  double makespan = 0.0;
  double length = 0.0;
  std::uint64_t scene_hash = 0;  // scene after the step
};

struct EpisodeState {
  Scene scene;
  int t = 0;
  std::vector<StepRecord> history;
};

struct RunMetrics {
  double success_rate = 0.0;       // SR: placed / n
  double distance_traveled = 0.0;  // DT, meters
  double completion_time = 0.0;    // CT: sum of per-step makespans, seconds
  double inference_time = 0.0;     // IT: planning CPU seconds
  double total_time = 0.0;         // F: sum of agent durations
  bool succeeded = false;
  int steps = 0;
  int placed = 0;
  int n_objects = 0;
};

struct EpisodeResult {
  RunMetrics metrics;
  std::vector<StepRecord> log;
  Scene final_scene;
};

struct PolicyConfig {
  int horizon = 0;  // 0 selects 2n
  double tolerance = 0.1;
  double time_budget = 120.0;
  FusionWeights fusion;
  ProposalConfig proposal;
  HeatmapConfig heatmap;
  MapfOptions mapf;
  /// Single-pair fallbacks tried after the assigned pairs all fail.
  int fallback_pairs = 12;

  void validate() const;
  int horizon_for(int n_objects) const { return horizon > 0 ? horizon : 2 * n_objects; }
};

struct StepPlan {
  std::vector<ActionTriple> triples;
  JointPlan plan;
};

/// One round of pick assignment, placement scoring, region proposal and joint planning.
/// nullopt means no action could be planned.
std::optional<StepPlan> step(const EpisodeState& state, const Scene& target, const PolicyConfig& config);

/// Kinematic playback of a step. Agents end where their paths end; each carried object
/// lands on its region. Throws std::logic_error if the result has overlapping bodies.
EpisodeState execute(const EpisodeState& state, const StepPlan& plan);

/// Moves every agent to the center of its patch (planning assumes cell-centered starts).
Scene snap_agents(const Scene& scene, int patches);

/// Metrics of a finished episode; IT is supplied by the caller.
RunMetrics episode_metrics(const std::vector<StepRecord>& log, const Scene& final_scene, const Scene& target,
                           double tolerance, double inference_time);

/// Runs step/execute until every target is satisfied, the horizon is reached, planning
/// exceeds the time budget, or no action can be planned.
EpisodeResult run(const Scenario& scenario, const PolicyConfig& config = {});

/// Thread CPU seconds; planning time excludes other processes and threads.
double thread_cpu_seconds();

nlohmann::json step_to_json(const StepRecord& r);
StepRecord step_from_json(const nlohmann::json& j);
/// JSON-lines, one record per step.
std::string trajectory_log(const std::vector<StepRecord>& log);
std::vector<StepRecord> parse_trajectory_log(const std::string& text);

/// Re-applies logged steps to `start`; throws std::runtime_error if a logged scene hash
/// does not match.
Scene replay(const Scene& start, const std::vector<StepRecord>& log, int patches = 24);

}  // namespace maner
