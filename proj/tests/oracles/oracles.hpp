#pragma once

// Independent reference implementations used by the unit and acceptance tests. They
// share only plain data types with the library, never its algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "maner/mapf.hpp"
#include "maner/planning_grid.hpp"
#include "maner/world.hpp"

namespace oracle {

using maner::Cell;
using maner::TimedPath;
using maner::Vec2;

inline Vec2 lerp(Vec2 a, Vec2 b, double s) { return {a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s}; }

inline Vec2 position_at(const TimedPath& p, double t) {
  const auto& w = p.waypoints;
  if (t <= w.front().time) return w.front().position;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (t <= w[i + 1].time) return lerp(w[i].position, w[i + 1].position, (t - w[i].time) / (w[i + 1].time - w[i].time));
  return w.back().position;
}

inline double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Minimum over [t0, t1] of |agent(t) - obstacle(t)| with agent linear a -> b. Ternary
/// search on each piece where both motions are linear (distance is convex there).
inline double min_gap(const TimedPath& obs, Vec2 a, Vec2 b, double t0, double t1) {
  std::vector<double> cuts{t0};
  for (const auto& w : obs.waypoints)
    if (w.time > t0 && w.time < t1) cuts.push_back(w.time);
  cuts.push_back(t1);
  auto agent = [&](double t) { return t1 > t0 ? lerp(a, b, (t - t0) / (t1 - t0)) : a; };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    auto f = [&](double t) { return dist(agent(t), position_at(obs, t)); };
    best = std::min({best, f(lo), f(hi)});
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (f(m1) < f(m2))
        hi = m2;
      else
        lo = m1;
    }
    best = std::min(best, f((lo + hi) / 2));
  }
  return best;
}

struct TimeExpandedProblem {
  std::vector<std::vector<char>> free;  // [row][col]
  double cell = 0.5;
  int straight = 2;
  int diagonal = 3;
  double tick = 1.0;
  double radius_sum = 0.6180339887;
  std::vector<TimedPath> obstacles;

  int side() const { return static_cast<int>(free.size()); }
  Vec2 center(Cell c) const { return {(c.col + 0.5) * cell, (c.row + 0.5) * cell}; }
  bool ok(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < side() && c.row < side() && free[c.row][c.col]; }
  bool state_valid(Cell c, int k) const {
    for (const auto& o : obstacles)
      if (min_gap(o, center(c), center(c), k * tick, (k + 1) * tick) < radius_sum) return false;
    return true;
  }
  bool move_valid(Cell a, Cell b, int k, int d) const {
    for (const auto& o : obstacles)
      if (min_gap(o, center(a), center(b), k * tick, (k + d) * tick) < radius_sum) return false;
    return true;
  }
  int last_obstacle_tick() const {
    double t = 0;
    for (const auto& o : obstacles) t = std::max(t, o.waypoints.back().time);
    return static_cast<int>(std::ceil(t / tick)) + 1;
  }
};

/// Earliest tick at which the agent can stand on `goal` and stay there forever, found by
/// exhaustive expansion of (cell, tick) states up to `horizon`.
inline std::optional<int> time_expanded_optimum(const TimeExpandedProblem& pb, Cell start, Cell goal, int horizon) {
  const int n = pb.side();
  const int h_obs = pb.last_obstacle_tick();
  std::vector<std::vector<char>> reach(horizon + 1, std::vector<char>(n * n, 0));
  if (!pb.ok(start) || !pb.state_valid(start, 0)) return std::nullopt;
  reach[0][start.row * n + start.col] = 1;
  auto parks = [&](Cell c, int k) {
    for (int j = k; j <= std::max(k, h_obs) + 1; ++j)
      if (!pb.state_valid(c, j)) return false;
    return true;
  };
  for (int k = 0; k <= horizon; ++k) {
    if (reach[k][goal.row * n + goal.col] && parks(goal, k)) return k;
    for (int idx = 0; idx < n * n; ++idx) {
      if (!reach[k][idx]) continue;
      const Cell c{idx % n, idx / n};
      if (k + 1 <= horizon && pb.state_valid(c, k + 1)) reach[k + 1][idx] = 1;
      for (int dc = -1; dc <= 1; ++dc)
        for (int dr = -1; dr <= 1; ++dr) {
          if (!dc && !dr) continue;
          const Cell nb{c.col + dc, c.row + dr};
          if (!pb.ok(nb)) continue;
          const int d = (dc && dr) ? pb.diagonal : pb.straight;
          if (k + d > horizon) continue;
          if (reach[k + d][nb.row * n + nb.col]) continue;
          if (pb.state_valid(nb, k + d) && pb.move_valid(c, nb, k, d)) reach[k + d][nb.row * n + nb.col] = 1;
        }
    }
  }
  return std::nullopt;
}

struct AuditResult {
  int agent_agent = 0;
  int agent_static = 0;
  double min_agent_gap = std::numeric_limits<double>::infinity();
};

/// Samples every path at fixed dt up to the latest finish and counts overlaps.
inline AuditResult dense_audit(const std::vector<TimedPath>& paths, const maner::Scene& scene, double dt,
                               double slack = 1e-9) {
  AuditResult res;
  double end = 0;
  for (const auto& p : paths) end = std::max(end, p.waypoints.back().time);
  const int steps = static_cast<int>(std::ceil(end / dt)) + 1;
  for (int s = 0; s <= steps; ++s) {
    const double t = s * dt;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const Vec2 p = position_at(paths[i], t);
      const double r = paths[i].radius;
      bool hit = p.x < r - slack || p.y < r - slack || p.x > scene.arena_size - r + slack ||
                 p.y > scene.arena_size - r + slack;
      for (const auto& o : scene.obstacles) {
        double d;
        if (o.shape == maner::Obstacle::Shape::disc) {
          d = dist(p, o.center) - o.radius;
        } else {
          const double dx = std::max(std::abs(p.x - o.center.x) - o.half_extent.x, 0.0);
          const double dy = std::max(std::abs(p.y - o.center.y) - o.half_extent.y, 0.0);
          d = std::hypot(dx, dy);
        }
        if (d < r - slack) hit = true;
      }
      res.agent_static += hit;
      for (std::size_t j = i + 1; j < paths.size(); ++j) {
        const double g = dist(p, position_at(paths[j], t));
        res.min_agent_gap = std::min(res.min_agent_gap, g - r - paths[j].radius);
        if (g < r + paths[j].radius - slack) ++res.agent_agent;
      }
    }
  }
  return res;
}

/// Minimum assignment cost by enumerating all permutations.
inline double brute_force_assignment(const std::vector<std::vector<double>>& cost) {
  std::vector<int> perm(cost.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost[i][perm[i]];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Flood fill ignoring costs; marks cells reachable with 8-connected moves.
inline std::vector<std::vector<char>> flood_fill8(const maner::Grid<std::uint8_t>& passable, Cell from) {
  const int w = passable.width(), h = passable.height();
  std::vector<std::vector<char>> seen(h, std::vector<char>(w, 0));
  if (!passable[from]) return seen;
  std::deque<Cell> q{from};
  seen[from.row][from.col] = 1;
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop_front();
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const Cell n{c.col + dc, c.row + dr};
        if (n.col < 0 || n.row < 0 || n.col >= w || n.row >= h || seen[n.row][n.col] || !passable[n]) continue;
        seen[n.row][n.col] = 1;
        q.push_back(n);
      }
  }
  return seen;
}

/// Unit-cost BFS distance in 8-connected moves; diagonal steps counted separately so the
/// octile length is straight + sqrt(2) * diagonal of a shortest path (Dijkstra over pairs).
inline std::optional<double> dijkstra_octile(const maner::Grid<std::uint8_t>& passable, Cell from, Cell to) {
  const int w = passable.width(), h = passable.height();
  std::vector<double> d(static_cast<std::size_t>(w * h), std::numeric_limits<double>::infinity());
  using E = std::pair<double, int>;
  std::priority_queue<E, std::vector<E>, std::greater<>> pq;
  if (!passable[from] || !passable[to]) return std::nullopt;
  d[from.row * w + from.col] = 0;
  pq.push({0, from.row * w + from.col});
  while (!pq.empty()) {
    auto [dd, i] = pq.top();
    pq.pop();
    if (dd > d[i]) continue;
    const Cell c{i % w, i / w};
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (!dr && !dc) continue;
        const Cell n{c.col + dc, c.row + dr};
        if (n.col < 0 || n.row < 0 || n.col >= w || n.row >= h || !passable[n]) continue;
        const double nd = dd + ((dr && dc) ? std::sqrt(2.0) : 1.0);
        if (nd < d[n.row * w + n.col] - 1e-12) {
          d[n.row * w + n.col] = nd;
          pq.push({nd, n.row * w + n.col});
        }
      }
  }
  const double r = d[to.row * w + to.col];
  if (std::isinf(r)) return std::nullopt;
  return r;
}

}  // namespace oracle
