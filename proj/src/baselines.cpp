#include "maner/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "maner/planning_grid.hpp"

namespace maner {

std::string to_string(BaselineVariant v) { return v == BaselineVariant::random ? "random" : "greedy"; }

void BaselineConfig::validate() const {
  if (resample_attempts < 1) throw std::invalid_argument("resample_attempts must be >= 1");
  if (!(time_budget > 0)) throw std::invalid_argument("time_budget must be positive");
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
}

Assignment hungarian(const std::vector<std::vector<double>>& cost) {
  Assignment out;
  const int rows = static_cast<int>(cost.size());
  if (rows == 0) return out;
  const int cols = static_cast<int>(cost.front().size());
  for (const auto& r : cost)
    if (static_cast<int>(r.size()) != cols) throw std::invalid_argument("ragged cost matrix");
  out.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  if (cols == 0) return out;
  if (rows > cols) {
    std::vector<std::vector<double>> t(static_cast<std::size_t>(cols), std::vector<double>(static_cast<std::size_t>(rows)));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t[j][i] = cost[i][j];
    const Assignment tr = hungarian(t);
    for (int j = 0; j < cols; ++j) out.row_to_col[static_cast<std::size_t>(tr.row_to_col[j])] = j;
    out.cost = tr.cost;
    return out;
  }

  // 1-based potentials u (rows), v (columns); p[j] is the row matched to column j.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (int j = 1; j <= cols; ++j)
    if (p[j]) out.row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  for (int i = 0; i < rows; ++i) out.cost += cost[i][out.row_to_col[i]];
  return out;
}

namespace {

struct Route {
  bool reachable = false;
  std::vector<Vec2> cells;  // centers, in travel order
  std::vector<int> obstructors;
};

Route static_route(const Scene& scene, const AgentState& agent, const ObjectState& obj, Vec2 place, int patches) {
  Route r;
  const PlanningGrid st = build_static_grid(scene, patches, agent.radius);
  const Cell oc = st.cell_of(obj.position);
  auto a = astar_path(st.traversable, st.cell_of(agent.position), oc);
  auto b = astar_path(st.traversable, oc, st.cell_of(place));
  if (!a || !b) return r;
  r.reachable = true;
  for (const Cell& c : *a) r.cells.push_back(st.center(c));
  for (const Cell& c : *b) r.cells.push_back(st.center(c));

  std::vector<int> skip = objects_under(scene, agent.position, agent.radius);
  skip.push_back(obj.id);
  auto note = [&](int id) {
    if (std::find(skip.begin(), skip.end(), id) == skip.end() &&
        std::find(r.obstructors.begin(), r.obstructors.end(), id) == r.obstructors.end())
      r.obstructors.push_back(id);
  };
  for (const Vec2& p : r.cells)
    for (const auto& o : scene.objects)
      if (distance(o.position, p) < agent.radius + o.radius) note(o.id);
  // Whatever sits on the drop point itself.
  for (const auto& o : scene.objects)
    if (distance(o.position, place) <= o.radius + obj.radius) note(o.id);
  return r;
}

bool drop_clear(const Scene& scene, const PlanningGrid& st, const ObjectState& obj, Vec2 place,
                const std::vector<int>& moving) {
  const double L = scene.arena_size;
  if (place.x < obj.radius || place.y < obj.radius || place.x > L - obj.radius || place.y > L - obj.radius)
    return false;
  if (!st.free(st.cell_of(place))) return false;
  for (const auto& o : scene.objects) {
    if (std::find(moving.begin(), moving.end(), o.id) != moving.end()) continue;
    if (distance(o.position, place) <= o.radius + obj.radius) return false;
  }
  for (const auto& ob : scene.obstacles)
    if (ob.distance_to(place) <= obj.radius) return false;
  return true;
}

struct Task {
  int agent_id;
  int object_id;
  Vec2 place;
};

class BaselineRunner {
 public:
  BaselineRunner(const Scenario& sc, const BaselineConfig& cfg)
      : sc_(sc), cfg_(cfg), rng_(cfg.seed ? *cfg.seed : sc.seed) {}

  EpisodeResult run() {
    state_.scene = snap_agents(sc_.start, cfg_.mapf.patches);
    const int n = static_cast<int>(state_.scene.objects.size());
    const int horizon = cfg_.horizon_for(n);
    double it = 0.0;
    while (state_.t < horizon && it <= cfg_.time_budget) {
      if (placed_object_count(state_.scene, sc_.target, cfg_.tolerance) == n) break;
      const double t0 = thread_cpu_seconds();
      auto plan = iterate();
      it += thread_cpu_seconds() - t0;
      // An iteration that used up its relocation attempts ends the episode.
      if (!plan) break;
      state_ = execute(state_, *plan);
    }
    EpisodeResult res;
    res.metrics = episode_metrics(state_.history, state_.scene, sc_.target, cfg_.tolerance, it);
    res.log = std::move(state_.history);
    res.final_scene = std::move(state_.scene);
    return res;
  }

 private:
  const Scene& scene() const { return state_.scene; }

  std::vector<int> misplaced() const {
    std::vector<int> out;
    for (const auto& o : scene().objects)
      if (!is_placed(scene(), sc_.target, o.id, cfg_.tolerance)) out.push_back(o.id);
    return out;
  }

  // Random: each agent takes a uniformly drawn misplaced object and heads for the
  // closest unoccupied class target.
  std::vector<Task> random_tasks() {
    std::vector<int> objs = misplaced();
    std::shuffle(objs.begin(), objs.end(), rng_);
    const auto slots = target_slots(scene(), sc_.target, cfg_.tolerance);
    std::vector<char> used(slots.size(), 0);
    std::vector<Task> out;
    std::size_t next = 0;
    for (const auto& a : scene().agents) {
      if (next >= objs.size()) break;
      const ObjectState* o = scene().find_object(objs[next++]);
      int best = -1;
      bool best_free = false;
      double best_d = 0.0;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& sl = slots[s];
        if (used[s] || sl.class_label != o->class_label || sl.claimed_by) continue;
        const bool free = !sl.physically_taken || *sl.physically_taken == o->id;
        const double d = distance(sl.position, o->position);
        if (best < 0 || (free && !best_free) || (free == best_free && d < best_d)) {
          best = static_cast<int>(s);
          best_free = free;
          best_d = d;
        }
      }
      if (best < 0) continue;
      used[static_cast<std::size_t>(best)] = 1;
      out.push_back({a.id, o->id, slots[static_cast<std::size_t>(best)].position});
    }
    return out;
  }

  // Greedy: per-class optimal matching of misplaced objects to open targets on A*
  // distance, then agents take their nearest matched objects.
  std::vector<Task> greedy_tasks() const {
    const double r_agent = scene().agents.empty() ? AgentState{}.radius : scene().agents.front().radius;
    const PlanningGrid st = build_static_grid(scene(), cfg_.mapf.patches, r_agent);
    const auto slots = target_slots(scene(), sc_.target, cfg_.tolerance);
    const double big = 1e6;
    std::vector<std::pair<int, Vec2>> matched;
    for (int cls = 0; cls < kClassCount; ++cls) {
      std::vector<int> objs;
      for (int id : misplaced())
        if (static_cast<int>(scene().find_object(id)->class_label) == cls) objs.push_back(id);
      std::vector<std::size_t> open;
      for (std::size_t s = 0; s < slots.size(); ++s)
        if (static_cast<int>(slots[s].class_label) == cls && !slots[s].claimed_by) open.push_back(s);
      if (objs.empty() || open.empty()) continue;
      std::vector<std::vector<double>> cost;
      for (int id : objs) {
        const auto field = distance_field(st.traversable, st.cell_of(scene().find_object(id)->position));
        std::vector<double> row;
        for (std::size_t s : open) {
          const double d = field[st.cell_of(slots[s].position)];
          row.push_back(std::isinf(d) ? big : d);
        }
        cost.push_back(std::move(row));
      }
      const Assignment as = hungarian(cost);
      for (std::size_t i = 0; i < objs.size(); ++i)
        if (as.row_to_col[i] >= 0)
          matched.emplace_back(objs[i], slots[open[static_cast<std::size_t>(as.row_to_col[i])]].position);
    }

    struct Option {
      double d;
      int agent;
      int object;
      Vec2 place;
    };
    std::vector<Option> options;
    for (const auto& a : scene().agents) {
      const auto field = distance_field(st.traversable, st.cell_of(a.position));
      for (const auto& [id, place] : matched) {
        const double d = field[st.cell_of(scene().find_object(id)->position)];
        options.push_back({std::isinf(d) ? big : d, a.id, id, place});
      }
    }
    std::sort(options.begin(), options.end(), [](const Option& x, const Option& y) {
      if (x.d != y.d) return x.d < y.d;
      if (x.agent != y.agent) return x.agent < y.agent;
      return x.object < y.object;
    });
    std::vector<Task> out;
    for (const auto& op : options) {
      const bool taken = std::any_of(out.begin(), out.end(), [&](const Task& t) {
        return t.agent_id == op.agent || t.object_id == op.object;
      });
      if (!taken) out.push_back({op.agent, op.object, op.place});
    }
    std::sort(out.begin(), out.end(), [](const Task& x, const Task& y) { return x.agent_id < y.agent_id; });
    return out;
  }

  std::optional<StepPlan> try_plan(const std::vector<Task>& tasks) const {
    std::vector<PlanRequest> reqs;
    std::vector<ActionTriple> triples;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& t = tasks[i];
      reqs.push_back({t.agent_id, t.object_id, scene().find_object(t.object_id)->position, t.place, static_cast<int>(i)});
      triples.push_back({t.agent_id, t.object_id, t.place});
    }
    auto plan = plan_joint(scene(), reqs, cfg_.mapf);
    if (!plan) return std::nullopt;
    return StepPlan{std::move(triples), std::move(*plan)};
  }

  // Candidate spots for moving `obj` off `route`: uniformly sampled (random) or closest
  // free cell centers first (greedy). At most resample_attempts spots.
  std::vector<Vec2> relocation_spots(const ObjectState& obj, const AgentState& agent, const std::vector<Vec2>& route) {
    const PlanningGrid st = build_static_grid(scene(), cfg_.mapf.patches, agent.radius);
    auto usable = [&](Vec2 p) {
      if (!drop_clear(scene(), st, obj, p, {obj.id})) return false;
      if (distance(p, obj.position) <= cfg_.tolerance) return false;
      for (const Vec2& c : route)
        if (distance(p, c) < agent.radius + obj.radius) return false;
      return true;
    };
    std::vector<Vec2> out;
    const auto limit = static_cast<std::size_t>(cfg_.resample_attempts);
    if (cfg_.variant == BaselineVariant::random) {
      std::uniform_real_distribution<double> u(0.0, scene().arena_size);
      for (int draw = 0; draw < 50 * cfg_.resample_attempts && out.size() < limit; ++draw) {
        const Vec2 p{u(rng_), u(rng_)};
        if (usable(p)) out.push_back(p);
      }
      return out;
    }
    std::vector<std::pair<double, Vec2>> cells;
    for (int r = 0; r < st.side; ++r)
      for (int c = 0; c < st.side; ++c) {
        const Vec2 p = st.center({c, r});
        if (usable(p)) cells.emplace_back(distance(p, obj.position), p);
      }
    std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < cells.size() && out.size() < limit; ++i) out.push_back(cells[i].second);
    return out;
  }

  std::optional<StepPlan> iterate() {
    const std::vector<Task> tasks =
        cfg_.variant == BaselineVariant::random ? random_tasks() : greedy_tasks();
    if (tasks.empty()) return std::nullopt;
    const double r_agent = scene().agents.front().radius;
    const PlanningGrid st = build_static_grid(scene(), cfg_.mapf.patches, r_agent);
    std::vector<int> moving;
    for (const auto& t : tasks) moving.push_back(t.object_id);
    std::vector<Task> clear;
    for (const auto& t : tasks)
      if (drop_clear(scene(), st, *scene().find_object(t.object_id), t.place, moving)) clear.push_back(t);
    if (!clear.empty())
      if (auto plan = try_plan(clear)) return plan;

    // Obstruction handling, one task at a time.
    for (const auto& t : tasks) {
      const AgentState* agent = scene().find_agent(t.agent_id);
      const ObjectState* obj = scene().find_object(t.object_id);
      const Route route = static_route(scene(), *agent, *obj, t.place, cfg_.mapf.patches);
      if (!route.reachable) continue;
      const bool drop_ok = drop_clear(scene(), st, *obj, t.place, {t.object_id});
      if (drop_ok && tasks.size() > 1)
        if (auto plan = try_plan({t})) return plan;
      if (route.obstructors.empty()) continue;
      const ObjectState* blocker = scene().find_object(route.obstructors.front());
      for (const Vec2& spot : relocation_spots(*blocker, *agent, route.cells))
        if (auto plan = try_plan({{t.agent_id, blocker->id, spot}})) return plan;
    }
    return std::nullopt;
  }

  const Scenario& sc_;
  BaselineConfig cfg_;
  std::mt19937_64 rng_;
  EpisodeState state_;
};

}  // namespace

std::vector<int> obstructing_objects(const Scene& scene, int agent_id, int object_id, Vec2 place, int patches) {
  const AgentState* a = scene.find_agent(agent_id);
  const ObjectState* o = scene.find_object(object_id);
  if (!a || !o) throw std::invalid_argument("unknown agent or object");
  return static_route(scene, *a, *o, place, patches).obstructors;
}

EpisodeResult run_baseline(const Scenario& scenario, const BaselineConfig& config) {
  config.validate();
  return BaselineRunner(scenario, config).run();
}

RunMetrics run_random(const Scenario& scenario, BaselineConfig config) {
  config.variant = BaselineVariant::random;
  return run_baseline(scenario, config).metrics;
}

RunMetrics run_greedy(const Scenario& scenario, BaselineConfig config) {
  config.variant = BaselineVariant::greedy;
  return run_baseline(scenario, config).metrics;
}

}  // namespace maner
