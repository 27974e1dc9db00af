#pragma once

#include <cstdint>
#include <vector>

#include "maner/geometry.hpp"
#include "maner/grid.hpp"
#include "maner/heatmap.hpp"

namespace maner {

struct RegionCandidate {
  Vec2 center;
  std::vector<Cell> member_patches;
  double score = 0.0;  // mean Q_place over members
};

struct ProposalConfig {
  int k = 3;
  double alpha = 0.8;
  int kmeans_restarts = 5;
  int kmeans_max_iter = 50;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on k < 1, alpha outside (0,1) or non-positive counts.
  void validate() const;
};

struct KMeansResult {
  std::vector<Vec2> centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  /// Within-cluster sum of squares after each iteration of the winning restart.
  std::vector<double> history;
};

/// Lloyd's algorithm with farthest-point seeding (first seed drawn from `seed`).
/// k is clamped to the number of points. Keeps the restart with the lowest inertia.
KMeansResult kmeans(const std::vector<Vec2>& points, int k, int restarts, int max_iter,
                    std::uint64_t seed);

/// Thresholds q_place strictly above alpha * max, clusters the surviving patch centers
/// and snaps each centroid to its nearest member patch center. Sorted by score,
/// descending. Empty when the heatmap has no positive value.
std::vector<RegionCandidate> propose_regions(const Heatmap& q_place, double arena_size,
                                             const ProposalConfig& config = {});

}  // namespace maner
