#include "maner/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maner {

void FusionWeights::validate() const {
  if (!(w_f > 0.0 && w_f < 1.0) || !(w_q > 0.0 && w_q < 1.0))
    throw std::invalid_argument("fusion weights must lie in (0, 1)");
}

PlanningGrid agent_grid(const Scene& scene, const AgentState& agent, int patches,
                        std::optional<int> carried) {
  GridOptions opt;
  opt.agent_radius = agent.radius;
  opt.passable_objects = objects_under(scene, agent.position, agent.radius);
  if (carried) opt.ignored_objects.push_back(*carried);
  return build_planning_grid(scene, patches, opt);
}

std::vector<std::optional<double>> pick_distances(const Scene& scene, int agent_id,
                                                  const HeatmapConfig& config) {
  const AgentState* agent = scene.find_agent(agent_id);
  if (!agent) throw std::invalid_argument("unknown agent " + std::to_string(agent_id));
  std::vector<std::optional<double>> out;
  out.reserve(scene.objects.size());
  for (const auto& o : scene.objects) {
    const PlanningGrid g = agent_grid(scene, *agent, config.patches, o.id);
    out.push_back(astar_distance(g.traversable, g.cell_of(agent->position), g.cell_of(o.position)));
  }
  return out;
}

Heatmap pick_heatmap(const Scene& scene, const Scene& target, int agent_id,
                     const HeatmapConfig& config) {
  Heatmap h(config.patches, config.patches, 0.0);
  const auto dist = pick_distances(scene, agent_id, config);
  double d_min = kUnreachable, d_max = -1.0;
  for (const auto& d : dist)
    if (d) {
      d_min = std::min(d_min, *d);
      d_max = std::max(d_max, *d);
    }
  if (d_max < 0.0) return h;

  const double cell = scene.arena_size / config.patches;
  const auto slots = target_slots(scene, target, config.tolerance);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (!dist[i]) continue;
    const auto& o = scene.objects[i];
    double v = d_max > d_min ? (d_max - *dist[i]) / (d_max - d_min) : 1.0;
    for (const auto& s : slots)
      if (s.claimed_by == o.id) v *= config.placed_factor;
    const Cell c{std::clamp(static_cast<int>(std::floor(o.position.x / cell)), 0, config.patches - 1),
                 std::clamp(static_cast<int>(std::floor(o.position.y / cell)), 0, config.patches - 1)};
    h[c] = std::max(h[c], v);
  }
  return h;
}

std::vector<PickAssignment> assign_picks(const std::vector<std::pair<int, Heatmap>>& heatmaps,
                                         const std::vector<ObjectState>& objects,
                                         double arena_size) {
  std::vector<PickAssignment> pairs;
  for (const auto& [agent, h] : heatmaps) {
    const double cell = arena_size / h.width();
    for (const auto& o : objects) {
      const Cell c{std::clamp(static_cast<int>(std::floor(o.position.x / cell)), 0, h.width() - 1),
                   std::clamp(static_cast<int>(std::floor(o.position.y / cell)), 0, h.height() - 1)};
      if (h[c] > 0.0) pairs.push_back({agent, o.id, h[c]});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const PickAssignment& a, const PickAssignment& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.agent_id != b.agent_id) return a.agent_id < b.agent_id;
    return a.object_id < b.object_id;
  });
  std::vector<PickAssignment> out;
  std::vector<int> agents_done, objects_done;
  for (const auto& p : pairs) {
    if (std::find(agents_done.begin(), agents_done.end(), p.agent_id) != agents_done.end()) continue;
    if (std::find(objects_done.begin(), objects_done.end(), p.object_id) != objects_done.end()) continue;
    out.push_back(p);
    agents_done.push_back(p.agent_id);
    objects_done.push_back(p.object_id);
  }
  return out;
}

double neighborhood_density(const Grid<std::uint8_t>& occupied, Cell c, int window) {
  const int half = window / 2;
  int total = 0, filled = 0;
  for (int dr = -half; dr <= half; ++dr)
    for (int dc = -half; dc <= half; ++dc) {
      const Cell n{c.col + dc, c.row + dr};
      if (!occupied.in_bounds(n)) continue;
      ++total;
      filled += occupied[n] != 0;
    }
  return total ? static_cast<double>(filled) / total : 0.0;
}

Heatmap feasibility_heatmap(const PlanningGrid& grid, Cell pickup,
                            const std::vector<Cell>& other_pickups, const HeatmapConfig& config) {
  Heatmap h(grid.side, grid.side, 0.0);
  if (!grid.free(pickup)) return h;
  const Grid<double> dist = distance_field(grid.traversable, pickup);

  auto candidate = [&](Cell c) {
    return grid.placeable[c] && dist[c] != kUnreachable &&
           std::find(other_pickups.begin(), other_pickups.end(), c) == other_pickups.end();
  };
  double d_min = kUnreachable, d_max = -1.0;
  for (int r = 0; r < grid.side; ++r)
    for (int c = 0; c < grid.side; ++c)
      if (candidate({c, r})) {
        d_min = std::min(d_min, dist.at(c, r));
        d_max = std::max(d_max, dist.at(c, r));
      }
  if (d_max < 0.0) return h;

  // Stretching the range by one cell keeps the farthest reachable patch above zero.
  const double top = d_max + 1.0;
  for (int r = 0; r < grid.side; ++r)
    for (int c = 0; c < grid.side; ++c) {
      if (!candidate({c, r})) continue;
      double v = (top - dist.at(c, r)) / (top - d_min);
      if (neighborhood_density(grid.occupied, {c, r}, config.density_window) > config.density_threshold)
        v *= config.density_factor;
      h.at(c, r) = v;
    }
  return h;
}

std::vector<Vec2> quality_targets(const Scene& scene, const Scene& target, int picked_object,
                                  double tolerance) {
  const ObjectState* picked = scene.find_object(picked_object);
  if (!picked) throw std::invalid_argument("unknown object " + std::to_string(picked_object));
  Scene rest = scene;
  rest.objects.erase(std::remove_if(rest.objects.begin(), rest.objects.end(),
                                    [&](const ObjectState& o) { return o.id == picked_object; }),
                     rest.objects.end());
  std::vector<Vec2> free_slots, unclaimed, all;
  for (const auto& s : target_slots(rest, target, tolerance)) {
    if (s.class_label != picked->class_label) continue;
    all.push_back(s.position);
    if (!s.claimed_by) unclaimed.push_back(s.position);
    if (!s.physically_taken) free_slots.push_back(s.position);
  }
  if (all.empty()) throw std::invalid_argument("no target for class");
  if (!free_slots.empty()) return free_slots;
  if (!unclaimed.empty()) return unclaimed;
  return all;
}

Heatmap quality_heatmap(const Scene& scene, const Scene& target, int picked_object,
                        const HeatmapConfig& config) {
  const auto targets = quality_targets(scene, target, picked_object, config.tolerance);
  const double cell = scene.arena_size / config.patches;
  const double diag = scene.arena_size * kSqrt2;
  Heatmap h(config.patches, config.patches, 0.0);
  for (int r = 0; r < config.patches; ++r)
    for (int c = 0; c < config.patches; ++c) {
      const Vec2 p{(c + 0.5) * cell, (r + 0.5) * cell};
      double d = kUnreachable;
      for (const Vec2& t : targets) d = std::min(d, distance(p, t));
      h.at(c, r) = std::clamp(1.0 - d / diag, 0.0, 1.0);
    }
  return h;
}

Heatmap fuse(const Heatmap& feas, const Heatmap& qual, const FusionWeights& weights) {
  if (feas.width() != qual.width() || feas.height() != qual.height())
    throw std::invalid_argument("heatmap shape mismatch");
  Heatmap out(feas.width(), feas.height(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = weights.w_f * feas.data()[i] + weights.w_q * qual.data()[i];
  return out;
}

GrayImage heatmap_to_gray(const Heatmap& h) {
  GrayImage img(h.width(), h.height(), 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double v = std::clamp(h.data()[i], 0.0, 1.0);
    img.data()[i] = static_cast<std::uint8_t>(std::lround(255.0 - v * 255.0));
  }
  return img;
}

void write_heatmap_pgm(const Heatmap& h, const std::string& path) { write_pgm(heatmap_to_gray(h), path); }

nlohmann::json heatmap_to_json(const Heatmap& h) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < h.height(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < h.width(); ++c) row.push_back(h.at(c, r));
    rows.push_back(std::move(row));
  }
  return {{"width", h.width()}, {"height", h.height()}, {"values", rows}};
}

Heatmap heatmap_from_json(const nlohmann::json& j) {
  Heatmap h(j.at("width").get<int>(), j.at("height").get<int>(), 0.0);
  const auto& rows = j.at("values");
  for (int r = 0; r < h.height(); ++r)
    for (int c = 0; c < h.width(); ++c) h.at(c, r) = rows.at(r).at(c).get<double>();
  return h;
}

}  // namespace maner
