#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "maner/grid.hpp"
#include "maner/planning_grid.hpp"
#include "maner/raster.hpp"
#include "maner/world.hpp"

namespace maner {

/// Patch-resolution score grid, values in [0, 1].
using Heatmap = Grid<double>;

struct FusionWeights {
  double w_f = 0.2;
  double w_q = 0.8;

  /// Throws std::invalid_argument unless both weights lie in (0, 1).
  void validate() const;
};

struct HeatmapConfig {
  int patches = 24;
  double agent_radius = 0.2;
  /// An object within this distance of a class target counts as placed.
  double tolerance = 0.1;
  /// Factor applied to objects that already satisfy a target.
  double placed_factor = 0.1;
  int density_window = 5;
  double density_threshold = 0.3;
  double density_factor = 0.5;
};

/// Grid an agent plans on: objects under its footprint are passable, `carried` is removed.
PlanningGrid agent_grid(const Scene& scene, const AgentState& agent, int patches,
                        std::optional<int> carried = std::nullopt);

/// Octile A* distance (cells) from the agent to the patch of each object, with the
/// object itself removed from the grid. nullopt when unreachable.
std::vector<std::optional<double>> pick_distances(const Scene& scene, int agent_id,
                                                  const HeatmapConfig& config);

/// Nonzero only on patches holding an object center. Min-max normalized inverse A*
/// distance; a single reachable object scores 1. Objects already resting on a class
/// target are scaled by placed_factor.
Heatmap pick_heatmap(const Scene& scene, const Scene& target, int agent_id,
                     const HeatmapConfig& config = {});

struct PickAssignment {
  int agent_id = 0;
  int object_id = 0;
  double confidence = 0.0;
};

/// Greedy by descending confidence, ties broken by agent id then object id; claimed
/// objects and satisfied agents drop out. Zero-confidence pairs are never assigned.
std::vector<PickAssignment> assign_picks(const std::vector<std::pair<int, Heatmap>>& heatmaps,
                                         const std::vector<ObjectState>& objects,
                                         double arena_size);

/// Drop-off reachability from the pickup patch. Zero on patches that are not placeable,
/// unreachable, or reserved by another agent's pickup; elsewhere
/// (d_max + 1 - d) / (d_max + 1 - d_min), halved where the surrounding window is crowded.
Heatmap feasibility_heatmap(const PlanningGrid& grid, Cell pickup,
                            const std::vector<Cell>& other_pickups,
                            const HeatmapConfig& config = {});

/// Fraction of occupied cells in the density window centered on `c` (in-bounds cells only).
double neighborhood_density(const Grid<std::uint8_t>& occupied, Cell c, int window);

/// Class targets the picked object should head for: physically free ones first, then
/// ones without a correct-class occupant, then all of them.
std::vector<Vec2> quality_targets(const Scene& scene, const Scene& target, int picked_object,
                                  double tolerance);

/// 1 - dist(patch center, nearest quality target) / arena diagonal.
/// Throws std::invalid_argument("no target for class") when the class has no target.
Heatmap quality_heatmap(const Scene& scene, const Scene& target, int picked_object,
                        const HeatmapConfig& config = {});

/// w_f * feas + w_q * qual. Throws std::invalid_argument on shape mismatch.
Heatmap fuse(const Heatmap& feas, const Heatmap& qual, const FusionWeights& weights = {});

/// 8-bit export with darker = higher confidence.
GrayImage heatmap_to_gray(const Heatmap& h);
void write_heatmap_pgm(const Heatmap& h, const std::string& path);
nlohmann::json heatmap_to_json(const Heatmap& h);
Heatmap heatmap_from_json(const nlohmann::json& j);

}  // namespace maner
