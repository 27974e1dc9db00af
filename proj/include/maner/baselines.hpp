#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "maner/mapf.hpp"
#include "maner/policy.hpp"
#include "maner/world.hpp"

namespace maner {

enum class BaselineVariant { random, greedy };

std::string to_string(BaselineVariant v);

struct BaselineConfig {
  BaselineVariant variant = BaselineVariant::random;
  /// Relocation spots tried per obstruction before the iteration is abandoned.
  int resample_attempts = 20;
  double time_budget = 120.0;
  int horizon = 0;  // 0 selects 4n
  double tolerance = 0.1;
  MapfOptions mapf;
  /// Overrides the scenario seed for the random variant's draws.
  std::optional<std::uint64_t> seed;

  void validate() const;
  int horizon_for(int n_objects) const { return horizon > 0 ? horizon : 4 * n_objects; }
};

struct Assignment {
  std::vector<int> row_to_col;  // -1 for rows left unmatched
  double cost = 0.0;
};

/// Minimum-cost assignment (potentials form of the Hungarian method). Rectangular
/// matrices are allowed; every row is matched when rows <= cols, every column otherwise.
Assignment hungarian(const std::vector<std::vector<double>>& cost);

/// Objects whose footprint intersects the static shortest route agent -> object ->
/// place, computed while ignoring movable objects. Objects under the agent and the
/// carried object are skipped. Ordered by first contact along the route.
std::vector<int> obstructing_objects(const Scene& scene, int agent_id, int object_id, Vec2 place, int patches);

/// Full episode with a trajectory log in the policy's format.
EpisodeResult run_baseline(const Scenario& scenario, const BaselineConfig& config);

RunMetrics run_random(const Scenario& scenario, BaselineConfig config = {});
RunMetrics run_greedy(const Scenario& scenario, BaselineConfig config = {});

}  // namespace maner
