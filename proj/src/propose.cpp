#include "maner/propose.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace maner {

void ProposalConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (kmeans_restarts < 1 || kmeans_max_iter < 1)
    throw std::invalid_argument("k-means restarts and iterations must be positive");
}

namespace {

double sq(Vec2 a, Vec2 b) { return dot(a - b, a - b); }

int nearest(const std::vector<Vec2>& centroids, Vec2 p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = sq(p, centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

KMeansResult lloyd(const std::vector<Vec2>& points, std::vector<Vec2> centroids, int max_iter) {
  KMeansResult res;
  res.labels.assign(points.size(), 0);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int l = nearest(centroids, points[i]);
      if (l != res.labels[i]) changed = true;
      res.labels[i] = l;
    }
    std::vector<Vec2> sum(centroids.size());
    std::vector<int> count(centroids.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sum[res.labels[i]] = sum[res.labels[i]] + points[i];
      ++count[res.labels[i]];
    }
    for (std::size_t j = 0; j < centroids.size(); ++j)
      if (count[j]) centroids[j] = sum[j] * (1.0 / count[j]);
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) inertia += sq(points[i], centroids[res.labels[i]]);
    res.history.push_back(inertia);
    if (!changed) break;
  }
  res.centroids = std::move(centroids);
  res.inertia = res.history.empty() ? 0.0 : res.history.back();
  return res;
}

}  // namespace

KMeansResult kmeans(const std::vector<Vec2>& points, int k, int restarts, int max_iter,
                    std::uint64_t seed) {
  if (points.empty()) return {};
  k = std::clamp(k, 1, static_cast<int>(points.size()));
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::vector<Vec2> seeds{points[pick(rng)]};
    while (static_cast<int>(seeds.size()) < k) {
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (const Vec2& s : seeds) d = std::min(d, sq(points[i], s));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      seeds.push_back(points[far]);
    }
    KMeansResult res = lloyd(points, std::move(seeds), max_iter);
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

std::vector<RegionCandidate> propose_regions(const Heatmap& q_place, double arena_size,
                                             const ProposalConfig& config) {
  config.validate();
  double q_max = 0.0;
  for (double v : q_place.data()) q_max = std::max(q_max, v);
  if (q_max <= 0.0) return {};

  const double cell = arena_size / q_place.width();
  std::vector<Cell> cells;
  std::vector<Vec2> points;
  for (int r = 0; r < q_place.height(); ++r)
    for (int c = 0; c < q_place.width(); ++c)
      if (q_place.at(c, r) > config.alpha * q_max) {
        cells.push_back({c, r});
        points.push_back({(c + 0.5) * cell, (r + 0.5) * cell});
      }

  const KMeansResult km = kmeans(points, config.k, config.kmeans_restarts, config.kmeans_max_iter, config.seed);
  std::vector<RegionCandidate> out(km.centroids.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& cand = out[km.labels[i]];
    cand.member_patches.push_back(cells[i]);
    cand.score += q_place[cells[i]];
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const RegionCandidate& c) { return c.member_patches.empty(); }),
            out.end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    auto& cand = out[j];
    cand.score /= static_cast<double>(cand.member_patches.size());
    Vec2 centroid;
    for (const Cell& m : cand.member_patches) centroid = centroid + Vec2{(m.col + 0.5) * cell, (m.row + 0.5) * cell};
    centroid = centroid * (1.0 / cand.member_patches.size());
    double best = std::numeric_limits<double>::infinity();
    for (const Cell& m : cand.member_patches) {
      const Vec2 p{(m.col + 0.5) * cell, (m.row + 0.5) * cell};
      if (sq(p, centroid) < best) {
        best = sq(p, centroid);
        cand.center = p;
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RegionCandidate& a, const RegionCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.center.y != b.center.y) return a.center.y < b.center.y;
    return a.center.x < b.center.x;
  });
  return out;
}

}  // namespace maner
