#include "maner/planning_grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "maner/raster.hpp"

namespace maner {

Cell PlanningGrid::cell_of(Vec2 p) const {
  const int c = std::clamp(static_cast<int>(std::floor(p.x / cell_size)), 0, side - 1);
  const int r = std::clamp(static_cast<int>(std::floor(p.y / cell_size)), 0, side - 1);
  return {c, r};
}

namespace {

bool contains_id(const std::vector<int>& ids, int id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

PlanningGrid build_planning_grid(const Scene& scene, int side, const GridOptions& options) {
  PlanningGrid g;
  g.side = side;
  g.arena_size = scene.arena_size;
  g.cell_size = scene.arena_size / side;
  g.traversable = Grid<std::uint8_t>(side, side, 1);
  g.placeable = Grid<std::uint8_t>(side, side, 1);

  const double r = options.agent_radius;
  const double L = scene.arena_size;
  for (int row = 0; row < side; ++row)
    for (int col = 0; col < side; ++col) {
      const Rect sq = g.square({col, row});
      const double rr = r - kGeometryEps;
      bool blocked = sq.min.x < rr || sq.min.y < rr || sq.max.x > L - rr || sq.max.y > L - rr;
      for (std::size_t i = 0; i < scene.obstacles.size() && !blocked; ++i)
        blocked = scene.obstacles[i].distance_to(sq) < rr;
      if (blocked) {
        g.traversable.at(col, row) = 0;
        g.placeable.at(col, row) = 0;
        continue;
      }
      const Vec2 c = g.center({col, row});
      for (const auto& o : scene.objects) {
        if (contains_id(options.ignored_objects, o.id)) continue;
        if (distance(c, o.position) >= r + o.radius) continue;
        g.placeable.at(col, row) = 0;
        if (!contains_id(options.passable_objects, o.id)) g.traversable.at(col, row) = 0;
      }
    }

  Scene raw = scene;
  raw.objects.clear();
  for (const auto& o : scene.objects)
    if (!contains_id(options.ignored_objects, o.id)) raw.objects.push_back(o);
  g.occupied = occupancy_grid(raw, side);
  return g;
}

PlanningGrid build_static_grid(const Scene& scene, int side, double agent_radius) {
  Scene bare = scene;
  bare.objects.clear();
  GridOptions opt;
  opt.agent_radius = agent_radius;
  return build_planning_grid(bare, side, opt);
}

std::vector<int> objects_under(const Scene& scene, Vec2 position, double radius) {
  std::vector<int> out;
  for (const auto& o : scene.objects)
    if (distance(o.position, position) < radius + o.radius) out.push_back(o.id);
  return out;
}

double octile_heuristic(Cell a, Cell b) {
  const int dx = std::abs(a.col - b.col);
  const int dy = std::abs(a.row - b.row);
  return std::max(dx, dy) - std::min(dx, dy) + std::min(dx, dy) * kSqrt2;
}

namespace {

constexpr int kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

struct SearchNode {
  double f;
  double g;
  std::size_t index;
  bool operator>(const SearchNode& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g < o.g;  // deeper first on ties
    return index > o.index;
  }
};

// Shared best-first search. With a zero heuristic and no goal it is Dijkstra.
struct OctileSearch {
  const Grid<std::uint8_t>& passable;
  std::vector<OctileLength> length;
  std::vector<double> g;
  std::vector<std::size_t> parent;
  std::vector<char> closed;

  explicit OctileSearch(const Grid<std::uint8_t>& p)
      : passable(p), length(p.size()), g(p.size(), kUnreachable), parent(p.size(), p.size()),
        closed(p.size(), 0) {}

  bool run(Cell from, std::optional<Cell> to) {
    const int w = passable.width();
    if (!passable.in_bounds(from) || !passable[from]) return false;
    if (to && (!passable.in_bounds(*to) || !passable[*to])) return false;
    std::priority_queue<SearchNode, std::vector<SearchNode>, std::greater<>> open;
    const std::size_t s = passable.index(from.col, from.row);
    g[s] = 0.0;
    open.push({to ? octile_heuristic(from, *to) : 0.0, 0.0, s});
    while (!open.empty()) {
      const SearchNode n = open.top();
      open.pop();
      if (closed[n.index]) continue;
      closed[n.index] = 1;
      const Cell c{static_cast<int>(n.index % static_cast<std::size_t>(w)),
                   static_cast<int>(n.index / static_cast<std::size_t>(w))};
      if (to && c == *to) return true;
      for (const auto& d : kDirs) {
        const Cell nb{c.col + d[0], c.row + d[1]};
        if (!passable.in_bounds(nb) || !passable[nb]) continue;
        const std::size_t ni = passable.index(nb.col, nb.row);
        if (closed[ni]) continue;
        OctileLength len = length[n.index];
        if (d[0] != 0 && d[1] != 0)
          ++len.diagonal;
        else
          ++len.straight;
        const double ng = len.value();
        if (ng < g[ni]) {
          g[ni] = ng;
          length[ni] = len;
          parent[ni] = n.index;
          open.push({ng + (to ? octile_heuristic(nb, *to) : 0.0), ng, ni});
        }
      }
    }
    return !to.has_value();
  }
};

}  // namespace

std::optional<double> astar_distance(const Grid<std::uint8_t>& passable, Cell from, Cell to) {
  OctileSearch search(passable);
  if (!search.run(from, to)) return std::nullopt;
  return search.g[passable.index(to.col, to.row)];
}

std::optional<std::vector<Cell>> astar_path(const Grid<std::uint8_t>& passable, Cell from, Cell to) {
  OctileSearch search(passable);
  if (!search.run(from, to)) return std::nullopt;
  std::vector<Cell> path;
  const auto w = static_cast<std::size_t>(passable.width());
  for (std::size_t i = passable.index(to.col, to.row); i != passable.size(); i = search.parent[i])
    path.push_back({static_cast<int>(i % w), static_cast<int>(i / w)});
  std::reverse(path.begin(), path.end());
  return path;
}

Grid<double> distance_field(const Grid<std::uint8_t>& passable, Cell from) {
  Grid<double> out(passable.width(), passable.height(), kUnreachable);
  OctileSearch search(passable);
  search.run(from, std::nullopt);
  out.data() = search.g;
  return out;
}

std::vector<Cell> supercover(const PlanningGrid& grid, Vec2 a, Vec2 b) {
  // Grid traversal in the style of Amanatides and Woo. When the segment passes through a
  // grid corner both side cells are added before stepping diagonally.
  std::vector<Cell> cells;
  auto add = [&](Cell c) {
    if (!grid.in_bounds(c)) return;
    if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
  };
  constexpr double eps = 1e-9;
  const double h = grid.cell_size;
  const Vec2 pa{a.x / h, a.y / h}, pb{b.x / h, b.y / h};
  const Vec2 d = pb - pa;
  // Start and end cells, plus neighbours when an endpoint lies on a grid line.
  for (const Vec2 p : {pa, pb}) {
    const int cx = static_cast<int>(std::floor(p.x)), cy = static_cast<int>(std::floor(p.y));
    const bool on_x = std::abs(p.x - std::round(p.x)) < eps, on_y = std::abs(p.y - std::round(p.y)) < eps;
    const int lx = static_cast<int>(std::round(p.x)) - 1, ly = static_cast<int>(std::round(p.y)) - 1;
    add({cx, cy});
    if (on_x) add({lx, cy});
    if (on_y) add({cx, ly});
    if (on_x && on_y) add({lx, ly});
  }
  // Crossing parameters of every vertical and horizontal grid line, merged in order.
  std::vector<std::pair<double, int>> events;  // (t, 1 = x line, 2 = y line)
  auto lines = [&](double from, double delta, int kind) {
    if (std::abs(delta) < eps) return;
    const double lo = std::min(from, from + delta), hi = std::max(from, from + delta);
    for (double g = std::floor(lo) + 1; g < hi - eps; g += 1.0)
      if (g > lo + eps) events.emplace_back((g - from) / delta, kind);
  };
  lines(pa.x, d.x, 1);
  lines(pa.y, d.y, 2);
  std::sort(events.begin(), events.end());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double t = events[i].first;
    const Vec2 p = pa + d * t;
    bool on_x = events[i].second == 1, on_y = events[i].second == 2;
    while (i + 1 < events.size() && events[i + 1].first - t < eps) {
      ++i;
      on_x = on_x || events[i].second == 1;
      on_y = on_y || events[i].second == 2;
    }
    const int gx = static_cast<int>(std::round(p.x)), gy = static_cast<int>(std::round(p.y));
    const int cx = on_x ? gx : static_cast<int>(std::floor(p.x));
    const int cy = on_y ? gy : static_cast<int>(std::floor(p.y));
    add({cx, cy});
    if (on_x) add({cx - 1, cy});
    if (on_y) add({cx, cy - 1});
    if (on_x && on_y) add({cx - 1, cy - 1});
  }
  return cells;
}

bool line_of_sight(const PlanningGrid& grid, Vec2 a, Vec2 b) {
  // Exact segment-vs-square test on the candidate cells of the bounding box.
  const Cell ca = grid.cell_of(a);
  const Cell cb = grid.cell_of(b);
  const int c0 = std::min(ca.col, cb.col), c1 = std::max(ca.col, cb.col);
  const int r0 = std::min(ca.row, cb.row), r1 = std::max(ca.row, cb.row);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      if (grid.free({c, r})) continue;
      const Rect sq = grid.square({c, r});
      if (distance(a, b, sq) <= 1e-12) return false;
    }
  return true;
}

}  // namespace maner
