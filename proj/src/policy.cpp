#include "maner/policy.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <sstream>
#include <stdexcept>

namespace maner {

void PolicyConfig::validate() const {
  if (horizon < 0) throw std::invalid_argument("horizon must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(time_budget > 0.0)) throw std::invalid_argument("time budget must be positive");
  fusion.validate();
  proposal.validate();
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + ts.tv_nsec * 1e-9;
}

Scene snap_agents(const Scene& scene, int patches) {
  Scene out = scene;
  const double cell = scene.arena_size / patches;
  for (auto& a : out.agents) {
    const int c = std::clamp(static_cast<int>(std::floor(a.position.x / cell)), 0, patches - 1);
    const int r = std::clamp(static_cast<int>(std::floor(a.position.y / cell)), 0, patches - 1);
    a.position = {(c + 0.5) * cell, (r + 0.5) * cell};
  }
  return out;
}

namespace {

Cell patch_of(Vec2 p, double arena, int patches) {
  const double cell = arena / patches;
  return {std::clamp(static_cast<int>(std::floor(p.x / cell)), 0, patches - 1),
          std::clamp(static_cast<int>(std::floor(p.y / cell)), 0, patches - 1)};
}

// Reachable (agent, object) pairs scored by the agent's pick heatmap. A zero score only
// means "farthest", so reachability comes from the distances. Objects already on a target
// are dropped while any misplaced object is still reachable by someone.
std::vector<PickAssignment> pick_pairs(const Scene& scene, const Scene& target, const PolicyConfig& config) {
  std::vector<PickAssignment> pairs;
  for (const auto& a : scene.agents) {
    const Heatmap h = pick_heatmap(scene, target, a.id, config.heatmap);
    const auto d = pick_distances(scene, a.id, config.heatmap);
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
      if (d[i])
        pairs.push_back(
            {a.id, scene.objects[i].id, h[patch_of(scene.objects[i].position, scene.arena_size, config.heatmap.patches)]});
  }
  auto placed = [&](const PickAssignment& p) { return is_placed(scene, target, p.object_id, config.tolerance); };
  if (std::any_of(pairs.begin(), pairs.end(), [&](const PickAssignment& p) { return !placed(p); }))
    pairs.erase(std::remove_if(pairs.begin(), pairs.end(), placed), pairs.end());
  return pairs;
}

std::vector<RegionCandidate> candidates_for(const Scene& scene, const Scene& target, const PickAssignment& pair,
                                            const std::vector<PickAssignment>& pairs, int t,
                                            const PolicyConfig& config, const std::vector<Vec2>& keep_off = {}) {
  const AgentState* agent = scene.find_agent(pair.agent_id);
  const ObjectState* obj = scene.find_object(pair.object_id);
  const int P = config.heatmap.patches;
  const PlanningGrid grid = agent_grid(scene, *agent, P, obj->id);
  std::vector<Cell> others;
  for (const auto& q : pairs)
    if (q.object_id != pair.object_id)
      others.push_back(patch_of(scene.find_object(q.object_id)->position, scene.arena_size, P));
  const Heatmap feas = feasibility_heatmap(grid, grid.cell_of(obj->position), others, config.heatmap);
  const Heatmap qual = quality_heatmap(scene, target, obj->id, config.heatmap);
  Heatmap place = fuse(feas, qual, config.fusion);
  for (std::size_t i = 0; i < place.size(); ++i)
    if (feas.data()[i] <= 0.0) place.data()[i] = 0.0;

  ProposalConfig pc = config.proposal;
  pc.seed = config.proposal.seed + static_cast<std::uint64_t>(t) * 1000003ULL +
            static_cast<std::uint64_t>(obj->id) * 7919ULL;
  auto cands = propose_regions(place, scene.arena_size, pc);

  // A region that contains a free class target drops the object exactly on it.
  Scene rest = scene;
  rest.objects.erase(std::remove_if(rest.objects.begin(), rest.objects.end(),
                                    [&](const ObjectState& o) { return o.id == obj->id; }),
                     rest.objects.end());
  const auto slots = target_slots(rest, target, config.tolerance);
  for (auto& cand : cands) {
    double best = kUnreachable;
    for (const auto& s : slots) {
      if (s.class_label != obj->class_label || s.claimed_by) continue;
      const Cell sc = patch_of(s.position, scene.arena_size, P);
      if (std::find(cand.member_patches.begin(), cand.member_patches.end(), sc) == cand.member_patches.end())
        continue;
      const double d = distance(s.position, cand.center);
      if (d < best) {
        best = d;
        cand.center = s.position;
      }
    }
  }
  cands.erase(std::remove_if(cands.begin(), cands.end(),
                             [&](const RegionCandidate& c) {
                               return distance(c.center, obj->position) <= config.tolerance;
                             }),
              cands.end());

  // An obstructor must not be dropped back onto the route it is blocking.
  const double clearance = agent->radius + obj->radius;
  auto blocks = [&](const RegionCandidate& c) {
    for (const Vec2& p : keep_off)
      if (distance(c.center, p) < clearance) return true;
    return false;
  };
  if (std::any_of(cands.begin(), cands.end(), [&](const RegionCandidate& c) { return !blocks(c); }))
    cands.erase(std::remove_if(cands.begin(), cands.end(), blocks), cands.end());
  return cands;
}

// Misplaced objects and open target slots the agents can still get next to.
struct Access {
  int objects = 0;
  int slots = 0;
};

Access access(const Scene& scene, const Scene& target, const PolicyConfig& config) {
  Access out;
  if (scene.agents.empty()) return out;
  GridOptions go;
  go.agent_radius = scene.agents.front().radius;
  for (const auto& a : scene.agents)
    for (int u : objects_under(scene, a.position, a.radius)) go.passable_objects.push_back(u);
  const PlanningGrid g = build_planning_grid(scene, config.heatmap.patches, go);
  Grid<std::uint8_t> seen(g.side, g.side, 0);
  for (const auto& a : scene.agents) {
    const Grid<double> d = distance_field(g.traversable, g.cell_of(a.position));
    for (int r = 0; r < g.side; ++r)
      for (int c = 0; c < g.side; ++c)
        if (d.at(c, r) != kUnreachable) seen.at(c, r) = 1;
  }
  auto near = [&](Vec2 p) {
    const Cell c = g.cell_of(p);
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const Cell n{c.col + dc, c.row + dr};
        if (seen.in_bounds(n) && seen[n]) return true;
      }
    return false;
  };
  for (const auto& o : scene.objects)
    if (!is_placed(scene, target, o.id, config.tolerance) && near(o.position)) ++out.objects;
  for (const auto& sl : target_slots(scene, target, config.tolerance))
    if (!sl.claimed_by && near(sl.position)) ++out.slots;
  return out;
}

// True when dropping `object_id` at `place` (a target) would cut the agents off from
// some other misplaced object or open target. Such objects are placed last.
bool seals_others(const Scene& scene, const Scene& target, int object_id, Vec2 place, const PolicyConfig& config) {
  const Access before = access(scene, target, config);
  Scene after = scene;
  after.find_object(object_id)->position = place;
  const Access now = access(after, target, config);
  const int was_misplaced = is_placed(scene, target, object_id, config.tolerance) ? 0 : 1;
  return now.objects < before.objects - was_misplaced || now.slots < before.slots - 1;
}

struct StepContext {
  int t = 0;
  std::vector<Vec2> keep_off;              // blocked routes obstructors must clear
  std::vector<int> target_only;            // objects that should land on a target
  std::vector<std::pair<int, Vec2>> drops;  // earlier drop points per object
};

std::optional<StepPlan> plan_pairs(const Scene& scene, const Scene& target, const std::vector<PickAssignment>& pairs,
                                   const StepContext& ctx, const PolicyConfig& config) {
  std::vector<int> moving;
  for (const auto& p : pairs) moving.push_back(p.object_id);
  std::vector<std::vector<RegionCandidate>> cands;
  for (const auto& p : pairs) {
    auto c = candidates_for(scene, target, p, pairs, ctx.t, config, ctx.keep_off);
    auto on_target = [&](const RegionCandidate& r) {
      return region_on_target(scene, target, p.object_id, r.center, moving, config.tolerance);
    };
    if (std::find(ctx.target_only.begin(), ctx.target_only.end(), p.object_id) != ctx.target_only.end()) {
      auto off = [&](const RegionCandidate& r) {
        return !on_target(r) || seals_others(scene, target, p.object_id, r.center, config);
      };
      if (!std::all_of(c.begin(), c.end(), off)) c.erase(std::remove_if(c.begin(), c.end(), off), c.end());
    }
    // No off-target drop where this object was already dropped: that only cycles.
    c.erase(std::remove_if(c.begin(), c.end(),
                           [&](const RegionCandidate& r) {
                             if (on_target(r)) return false;
                             return std::any_of(ctx.drops.begin(), ctx.drops.end(), [&](const auto& d) {
                               return d.first == p.object_id && distance(d.second, r.center) <= config.tolerance;
                             });
                           }),
            c.end());
    if (c.empty()) return std::nullopt;
    cands.push_back(std::move(c));
  }
  MapfOptions mo = config.mapf;
  mo.patches = config.heatmap.patches;
  mo.tolerance = config.tolerance;
  auto sel = select_regions(scene, target, pairs, cands, mo);
  if (!sel) return std::nullopt;
  StepPlan out;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out.triples.push_back({pairs[i].agent_id, pairs[i].object_id, sel->regions[i]});
  out.plan = std::move(sel->plan);
  return out;
}

}  // namespace

namespace {

struct Obstruction {
  std::vector<int> objects;
  std::vector<Vec2> route;  // cell centers of the blocked routes
};

// For every misplaced object that cannot be carried onto a target, the objects lying on
// its static shortest route (agent -> object -> nearest quality target).
Obstruction find_obstructions(const Scene& scene, const Scene& target, const std::vector<int>& stuck,
                              const PolicyConfig& config) {
  Obstruction out;
  if (stuck.empty() || scene.agents.empty()) return out;
  const double r_agent = scene.agents.front().radius;
  const PlanningGrid st = build_static_grid(scene, config.heatmap.patches, r_agent);
  for (int id : stuck) {
    const ObjectState* x = scene.find_object(id);
    const auto targets = quality_targets(scene, target, id, config.tolerance);
    Vec2 goal = targets.front();
    for (const Vec2& t : targets)
      if (distance(t, x->position) < distance(goal, x->position)) goal = t;
    std::vector<Cell> route;
    if (auto leg = astar_path(st.traversable, st.cell_of(x->position), st.cell_of(goal))) route = *leg;
    double best = kUnreachable;
    std::optional<std::vector<Cell>> approach;
    const AgentState* nearest = nullptr;
    for (const auto& a : scene.agents) {
      auto p = astar_path(st.traversable, st.cell_of(a.position), st.cell_of(x->position));
      if (p && static_cast<double>(p->size()) < best) {
        best = static_cast<double>(p->size());
        approach = std::move(p);
        nearest = &a;
      }
    }
    // The agent can always step off whatever it is standing on.
    std::vector<int> skip{id};
    if (nearest) {
      route.insert(route.end(), approach->begin(), approach->end());
      for (int u : objects_under(scene, nearest->position, nearest->radius)) skip.push_back(u);
    }
    for (const Cell& c : route) {
      const Vec2 p = st.center(c);
      out.route.push_back(p);
      for (const auto& o : scene.objects) {
        if (std::find(skip.begin(), skip.end(), o.id) != skip.end()) continue;
        if (distance(o.position, p) >= r_agent + o.radius) continue;
        if (std::find(out.objects.begin(), out.objects.end(), o.id) == out.objects.end()) out.objects.push_back(o.id);
      }
    }
  }
  return out;
}

}  // namespace

std::optional<StepPlan> step(const EpisodeState& state, const Scene& target, const PolicyConfig& config) {
  const Scene& scene = state.scene;
  if (placed_object_count(scene, target, config.tolerance) == static_cast<int>(scene.objects.size()))
    return std::nullopt;

  // Every reachable (agent, object) pair, tiered: pairs that can drop their object on a
  // target, then pairs that clear a blocked route, then the rest.
  std::vector<PickAssignment> all = pick_pairs(scene, target, config);
  std::vector<int> reaches_target;
  for (const auto& p : all) {
    if (is_placed(scene, target, p.object_id, config.tolerance)) continue;
    if (std::find(reaches_target.begin(), reaches_target.end(), p.object_id) != reaches_target.end()) continue;
    for (const auto& c : candidates_for(scene, target, p, {p}, state.t, config))
      if (region_on_target(scene, target, p.object_id, c.center, {p.object_id}, config.tolerance) &&
          !seals_others(scene, target, p.object_id, c.center, config)) {
        reaches_target.push_back(p.object_id);
        break;
      }
  }
  std::vector<int> stuck;
  for (const auto& o : scene.objects)
    if (!is_placed(scene, target, o.id, config.tolerance) &&
        std::find(reaches_target.begin(), reaches_target.end(), o.id) == reaches_target.end())
      stuck.push_back(o.id);
  const Obstruction obstruction = find_obstructions(scene, target, stuck, config);
  auto tier = [&](const PickAssignment& p) {
    auto has = [](const std::vector<int>& v, int id) { return std::find(v.begin(), v.end(), id) != v.end(); };
    if (has(reaches_target, p.object_id)) return 0;
    if (has(obstruction.objects, p.object_id)) return 1;
    return 2;
  };
  std::sort(all.begin(), all.end(), [&](const PickAssignment& a, const PickAssignment& b) {
    if (tier(a) != tier(b)) return tier(a) < tier(b);
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.agent_id != b.agent_id) return a.agent_id < b.agent_id;
    return a.object_id < b.object_id;
  });
  // Pairs that neither reach a target nor clear a route only run when nothing else can.
  const bool useful = !all.empty() && tier(all.front()) < 2;
  std::vector<PickAssignment> pairs;
  for (const auto& p : all) {
    if (useful && tier(p) == 2) break;
    const bool taken = std::any_of(pairs.begin(), pairs.end(), [&](const PickAssignment& q) {
      return q.agent_id == p.agent_id || q.object_id == p.object_id;
    });
    if (!taken) pairs.push_back(p);
  }

  StepContext ctx;
  ctx.t = state.t;
  ctx.keep_off = obstruction.route;
  ctx.target_only = reaches_target;
  for (const auto& rec : state.history)
    for (const auto& tr : rec.triples) ctx.drops.emplace_back(tr.object_id, tr.region);

  // Shed the last pair until a joint plan exists.
  std::vector<std::pair<int, int>> seen;
  if (!pairs.empty()) seen.emplace_back(pairs.front().agent_id, pairs.front().object_id);
  while (!pairs.empty()) {
    if (auto plan = plan_pairs(scene, target, pairs, ctx, config)) return plan;
    pairs.pop_back();
  }

  // Then single pairs in tier order.
  int attempts = 0;
  for (const auto& p : all) {
    if (attempts >= config.fallback_pairs) break;
    const std::pair<int, int> key{p.agent_id, p.object_id};
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    ++attempts;
    if (auto plan = plan_pairs(scene, target, {p}, ctx, config)) return plan;
  }
  return std::nullopt;
}

namespace {

void check_layout(const Scene& s) {
  const double L = s.arena_size;
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    if (o.position.x < o.radius - 1e-9 || o.position.y < o.radius - 1e-9 || o.position.x > L - o.radius + 1e-9 ||
        o.position.y > L - o.radius + 1e-9)
      throw std::logic_error("object " + std::to_string(o.id) + " left the arena");
    for (const auto& ob : s.obstacles)
      if (ob.distance_to(o.position) < o.radius - 1e-9)
        throw std::logic_error("object " + std::to_string(o.id) + " overlaps an obstacle");
    for (std::size_t j = i + 1; j < s.objects.size(); ++j)
      if (distance(o.position, s.objects[j].position) < o.radius + s.objects[j].radius - 1e-9)
        throw std::logic_error("objects " + std::to_string(o.id) + " and " + std::to_string(s.objects[j].id) +
                               " overlap");
  }
  for (std::size_t i = 0; i < s.agents.size(); ++i)
    for (std::size_t j = i + 1; j < s.agents.size(); ++j)
      if (distance(s.agents[i].position, s.agents[j].position) < s.agents[i].radius + s.agents[j].radius - 1e-9)
        throw std::logic_error("agents overlap after execution");
}

Scene apply(const Scene& scene, const std::vector<ActionTriple>& triples, const std::vector<TimedPath>& paths) {
  Scene next = scene;
  for (const auto& path : paths) {
    AgentState* a = next.find_agent(path.agent_id);
    if (!a) throw std::logic_error("path for unknown agent");
    if (path.waypoints.empty()) continue;
    const auto& w = path.waypoints;
    a->position = w.back().position;
    for (std::size_t i = w.size(); i-- > 1;)
      if (!(w[i].position == w[i - 1].position)) {
        const Vec2 d = w[i].position - w[i - 1].position;
        a->heading = wrap_angle(std::atan2(d.y, d.x));
        break;
      }
  }
  for (const auto& tr : triples) {
    ObjectState* o = next.find_object(tr.object_id);
    if (!o) throw std::logic_error("triple for unknown object");
    o->position = tr.region;
  }
  check_layout(next);
  return next;
}

}  // namespace

EpisodeState execute(const EpisodeState& state, const StepPlan& plan) {
  EpisodeState next;
  next.scene = apply(state.scene, plan.triples, plan.plan.paths);
  next.t = state.t + 1;
  next.history = state.history;
  StepRecord rec;
  rec.t = state.t;
  rec.triples = plan.triples;
  rec.paths = plan.plan.paths;
  rec.step_F = plan.plan.total_time;
  rec.makespan = plan.plan.makespan;
  rec.length = plan.plan.total_length;
  rec.scene_hash = scene_hash(next.scene);
  next.history.push_back(std::move(rec));
  return next;
}

RunMetrics episode_metrics(const std::vector<StepRecord>& log, const Scene& final_scene, const Scene& target,
                           double tolerance, double inference_time) {
  RunMetrics m;
  m.n_objects = static_cast<int>(final_scene.objects.size());
  m.placed = placed_object_count(final_scene, target, tolerance);
  m.success_rate = m.n_objects ? static_cast<double>(m.placed) / m.n_objects : 1.0;
  m.succeeded = m.placed == m.n_objects;
  m.steps = static_cast<int>(log.size());
  m.inference_time = inference_time;
  for (const auto& r : log) {
    m.distance_traveled += r.length;
    m.completion_time += r.makespan;
    m.total_time += r.step_F;
  }
  return m;
}

EpisodeResult run(const Scenario& scenario, const PolicyConfig& config) {
  config.validate();
  EpisodeState state;
  state.scene = snap_agents(scenario.start, config.heatmap.patches);
  const int n = static_cast<int>(state.scene.objects.size());
  const int horizon = config.horizon_for(n);
  double it = 0.0;
  while (state.t < horizon) {
    if (placed_object_count(state.scene, scenario.target, config.tolerance) == n) break;
    if (it > config.time_budget) break;
    const double t0 = thread_cpu_seconds();
    auto plan = step(state, scenario.target, config);
    it += thread_cpu_seconds() - t0;
    if (!plan) break;
    state = execute(state, *plan);
  }
  EpisodeResult res;
  res.metrics = episode_metrics(state.history, state.scene, scenario.target, config.tolerance, it);
  res.log = std::move(state.history);
  res.final_scene = std::move(state.scene);
  return res;
}

nlohmann::json step_to_json(const StepRecord& r) {
  nlohmann::json triples = nlohmann::json::array();
  for (const auto& tr : r.triples)
    triples.push_back({{"agent", tr.agent_id}, {"object", tr.object_id}, {"x", tr.region.x}, {"y", tr.region.y}});
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : r.paths) paths.push_back(path_to_json(p));
  return {{"t", r.t},
          {"triples", triples},
          {"paths", paths},
          {"step_F", r.step_F},
          {"makespan", r.makespan},
          {"length", r.length},
          {"scene_hash", hex(r.scene_hash)}};
}

StepRecord step_from_json(const nlohmann::json& j) {
  StepRecord r;
  r.t = j.at("t").get<int>();
  for (const auto& tr : j.at("triples"))
    r.triples.push_back({tr.at("agent").get<int>(), tr.at("object").get<int>(),
                         {tr.at("x").get<double>(), tr.at("y").get<double>()}});
  for (const auto& p : j.at("paths")) r.paths.push_back(path_from_json(p));
  r.step_F = j.at("step_F").get<double>();
  r.makespan = j.value("makespan", 0.0);
  r.length = j.value("length", 0.0);
  r.scene_hash = std::stoull(j.at("scene_hash").get<std::string>(), nullptr, 16);
  return r;
}

std::string trajectory_log(const std::vector<StepRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    out += step_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<StepRecord> parse_trajectory_log(const std::string& text) {
  std::vector<StepRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(step_from_json(nlohmann::json::parse(line)));
  return out;
}

Scene replay(const Scene& start, const std::vector<StepRecord>& log, int patches) {
  Scene s = snap_agents(start, patches);
  for (const auto& r : log) {
    s = apply(s, r.triples, r.paths);
    if (scene_hash(s) != r.scene_hash)
      throw std::runtime_error("replay diverged at step " + std::to_string(r.t));
  }
  return s;
}

}  // namespace maner
