#include "maner/mapf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace maner {

namespace {

constexpr int kForever = INT_MAX / 4;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct TickInterval {
  int start = 0;
  int end = 0;  // inclusive; kForever when open-ended
};

}  // namespace

double TimedPath::total_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    len += distance(waypoints[i - 1].position, waypoints[i].position);
  return len;
}

double TimedPath::total_time() const { return waypoints.empty() ? 0.0 : waypoints.back().time; }

Vec2 TimedPath::position_at(double t) const {
  if (waypoints.empty()) return {};
  if (t <= waypoints.front().time) return waypoints.front().position;
  if (t >= waypoints.back().time) return waypoints.back().position;
  const auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double s = (t - a.time) / (b.time - a.time);
  return a.position + (b.position - a.position) * s;
}

TimedPath stationary_path(int agent_id, Vec2 position, double radius) {
  TimedPath p;
  p.agent_id = agent_id;
  p.radius = radius;
  p.waypoints.push_back({position, 0.0, false});
  return p;
}

int MotionModel::straight_ticks(double cell) const {
  return std::max(1, static_cast<int>(std::ceil(cell / (speed * tick) - 1e-9)));
}
int MotionModel::diagonal_ticks(double cell) const {
  return std::max(1, static_cast<int>(std::ceil(kSqrt2 * cell / (speed * tick) - 1e-9)));
}
int MotionModel::dwell_ticks() const { return static_cast<int>(std::lround(dwell / tick)); }

namespace {

// Clearance between one obstacle trajectory and a body moving linearly from a at t0 to
// b at t1 (t1 may be infinite when a == b).
bool clear_of(const TimedPath& o, Vec2 a, double t0, Vec2 b, double t1, double reach) {
  if (o.waypoints.empty()) return true;
  std::vector<double> cuts{t0};
  for (const auto& w : o.waypoints)
    if (w.time > t0 && w.time < t1) cuts.push_back(w.time);
  const double t_last = o.waypoints.back().time;
  const bool open_ended = std::isinf(t1);
  if (!open_ended) cuts.push_back(t1);
  const Vec2 v_agent = open_ended || t1 <= t0 ? Vec2{} : (b - a) * (1.0 / (t1 - t0));
  auto agent_at = [&](double t) { return a + v_agent * (t - t0); };

  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double u0 = cuts[i], u1 = cuts[i + 1];
    const Vec2 q0 = o.position_at(u0);
    if (u1 <= u0) {
      if (distance(agent_at(u0), q0) < reach) return false;
      continue;
    }
    const Vec2 vq = (o.position_at(u1) - q0) * (1.0 / (u1 - u0));
    if (min_distance_linear(agent_at(u0), v_agent, q0, vq, u1 - u0) < reach) return false;
  }
  if (open_ended) {
    const double from = cuts.back();
    // Past every obstacle waypoint both bodies are at rest.
    if (distance(agent_at(from), o.position_at(std::max(from, t_last))) < reach) return false;
    if (cuts.size() == 1 && distance(a, o.position_at(t0)) < reach) return false;
  }
  return true;
}

bool clear_of_all(Vec2 a, double t0, Vec2 b, double t1, double radius,
                  const std::vector<TimedPath>& obstacles) {
  for (const auto& o : obstacles)
    if (!clear_of(o, a, t0, b, t1, radius + o.radius)) return false;
  return true;
}

// Inclusive tick ranges [lo, hi] during which resting at p is unsafe.
void add_unsafe(std::vector<TickInterval>& out, double ta, double tb, double tick) {
  if (!(tb > ta)) return;
  const int lo = std::max(0, static_cast<int>(std::floor(ta / tick)));
  int hi;
  if (std::isinf(tb))
    hi = kForever;
  else
    hi = static_cast<int>(std::ceil(tb / tick)) - 1;
  if (hi >= lo) out.push_back({lo, hi});
}

std::vector<TickInterval> tick_intervals(Vec2 p, double radius, const std::vector<TimedPath>& obstacles,
                                         double tick) {
  std::vector<TickInterval> unsafe;
  for (const auto& o : obstacles) {
    if (o.waypoints.empty()) continue;
    const double reach = radius + o.radius;
    const auto& w = o.waypoints;
    if (w.front().time > 0.0 && distance(p, w.front().position) < reach)
      add_unsafe(unsafe, -kInf, w.front().time, tick);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      const double t0 = w[i].time, t1 = w[i + 1].time;
      const Vec2 rel = w[i].position - p;
      const Vec2 vel = (w[i + 1].position - w[i].position) * (1.0 / (t1 - t0));
      const double qa = dot(vel, vel);
      const double qb = 2.0 * dot(rel, vel);
      const double qc = dot(rel, rel) - reach * reach;
      if (qa == 0.0) {
        if (qc < 0.0) add_unsafe(unsafe, t0, t1, tick);
        continue;
      }
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc <= 0.0) continue;
      const double sq = std::sqrt(disc);
      const double r1 = (-qb - sq) / (2.0 * qa);
      const double r2 = (-qb + sq) / (2.0 * qa);
      add_unsafe(unsafe, std::max(t0, t0 + r1), std::min(t1, t0 + r2), tick);
    }
    if (distance(p, w.back().position) < reach) add_unsafe(unsafe, w.back().time, kInf, tick);
  }
  std::sort(unsafe.begin(), unsafe.end(),
            [](const TickInterval& a, const TickInterval& b) { return a.start < b.start; });
  std::vector<TickInterval> safe;
  int next = 0;  // first tick not yet known unsafe
  for (const auto& u : unsafe) {
    if (u.start > next) safe.push_back({next, u.start - 1});
    if (u.end >= kForever) return safe;
    next = std::max(next, u.end + 1);
  }
  safe.push_back({next, kForever});
  return safe;
}

int octile_ticks(Cell a, Cell b, int straight, int diagonal) {
  const int dx = std::abs(a.col - b.col), dy = std::abs(a.row - b.row);
  const int lo = std::min(dx, dy), hi = std::max(dx, dy);
  return (hi - lo) * straight + lo * std::min(diagonal, 2 * straight);
}

constexpr int kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

}  // namespace

bool segment_clear(Vec2 a, double t0, Vec2 b, double t1, double radius,
                   const std::vector<TimedPath>& obstacles) {
  return clear_of_all(a, t0, b, t1, radius, obstacles);
}

std::vector<SafeInterval> safe_intervals(const PlanningGrid& grid, Cell cell, double radius,
                                         const std::vector<TimedPath>& obstacles,
                                         const MotionModel& motion) {
  std::vector<SafeInterval> out;
  if (!grid.free(cell)) return out;
  for (const auto& iv : tick_intervals(grid.center(cell), radius, obstacles, motion.tick))
    out.push_back({cell, iv.start * motion.tick,
                   iv.end >= kForever ? kInf : (iv.end + 1) * motion.tick});
  return out;
}

namespace {

struct SearchState {
  int leg;
  int cell;
  int interval;
  int t;        // arrival tick
  int depart;   // tick the parent cell was left (or dwell start for leg changes)
  int parent;
};

struct QueueEntry {
  int f;
  int t;
  int id;
  bool operator>(const QueueEntry& o) const {
    if (f != o.f) return f > o.f;
    if (t != o.t) return t < o.t;
    return id > o.id;
  }
};

class Sipp {
 public:
  Sipp(const PlanningGrid& grid, const std::vector<TimedPath>& obstacles, double radius,
       const MotionModel& motion)
      : grid_(grid), obstacles_(obstacles), radius_(radius), motion_(motion),
        intervals_(grid.traversable.size()), computed_(grid.traversable.size(), 0) {
    double last = 0.0;
    for (const auto& o : obstacles)
      if (!o.waypoints.empty()) last = std::max(last, o.waypoints.back().time);
    horizon_ = static_cast<int>(std::ceil(last / motion.tick)) + 1;
    straight_ = motion.straight_ticks(grid.cell_size);
    diagonal_ = motion.diagonal_ticks(grid.cell_size);
  }

  const std::vector<TickInterval>& intervals(int idx) {
    if (!computed_[idx]) {
      const Cell c{idx % grid_.side, idx / grid_.side};
      if (grid_.free(c)) intervals_[idx] = tick_intervals(grid_.center(c), radius_, obstacles_, motion_.tick);
      computed_[idx] = 1;
    }
    return intervals_[idx];
  }

  std::optional<SippResult> run(Cell start, const std::vector<SippGoal>& goals, int max_expansions) {
    if (goals.empty()) throw std::invalid_argument("sipp_plan needs at least one goal");
    if (!grid_.free(start)) return std::nullopt;
    for (const auto& g : goals)
      if (!grid_.free(g.cell)) return std::nullopt;
    const int legs = static_cast<int>(goals.size());
    const int cells = static_cast<int>(grid_.traversable.size());

    // Heuristic tail: dwell at the current goal plus every later leg.
    std::vector<int> tail(legs, 0);
    for (int l = legs - 1; l >= 0; --l) {
      tail[l] = goals[l].dwell_ticks;
      if (l + 1 < legs)
        tail[l] += tail[l + 1] + octile_ticks(goals[l].cell, goals[l + 1].cell, straight_, diagonal_);
    }
    auto h = [&](int leg, int cell) {
      return octile_ticks({cell % grid_.side, cell / grid_.side}, goals[leg].cell, straight_, diagonal_) + tail[leg];
    };

    const int s = start.row * grid_.side + start.col;
    const auto& s_iv = intervals(s);
    if (s_iv.empty() || s_iv.front().start != 0) return std::nullopt;

    std::vector<std::vector<int>> best(static_cast<std::size_t>(legs) * cells);
    auto best_of = [&](int leg, int cell, int iv) -> int& {
      auto& v = best[static_cast<std::size_t>(leg) * cells + cell];
      if (v.empty()) v.assign(intervals(cell).size(), kForever);
      return v[iv];
    };

    std::vector<SearchState> states;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
    auto push = [&](SearchState st) {
      int& b = best_of(st.leg, st.cell, st.interval);
      if (st.t >= b) return;
      b = st.t;
      states.push_back(st);
      open.push({st.t + h(st.leg, st.cell), st.t, static_cast<int>(states.size()) - 1});
    };
    push({0, s, 0, 0, 0, -1});

    int expansions = 0;
    while (!open.empty()) {
      const QueueEntry top = open.top();
      open.pop();
      const SearchState cur = states[top.id];
      if (cur.t > best_of(cur.leg, cur.cell, cur.interval)) continue;
      if (++expansions > max_expansions) return std::nullopt;
      const TickInterval iv = intervals(cur.cell)[cur.interval];
      const Cell here{cur.cell % grid_.side, cur.cell / grid_.side};

      if (here == goals[cur.leg].cell) {
        if (cur.leg == legs - 1) {
          if (iv.end >= kForever) return build(states, top.id, goals);
        } else if (cur.t + goals[cur.leg].dwell_ticks <= iv.end) {
          push({cur.leg + 1, cur.cell, cur.interval, cur.t + goals[cur.leg].dwell_ticks, cur.t, top.id});
        }
      }

      for (const auto& d : kDirs) {
        const Cell nb{here.col + d[0], here.row + d[1]};
        if (!grid_.free(nb)) continue;
        const int move = (d[0] != 0 && d[1] != 0) ? diagonal_ : straight_;
        const int ni = nb.row * grid_.side + nb.col;
        const auto& nivs = intervals(ni);
        for (std::size_t k = 0; k < nivs.size(); ++k) {
          const TickInterval& niv = nivs[k];
          const long lo = std::max<long>(cur.t, static_cast<long>(niv.start) - move);
          const long hi_a = iv.end;
          const long hi_b = niv.end >= kForever ? kForever : static_cast<long>(niv.end) - move;
          const long hi = std::min(hi_a, hi_b);
          if (lo > hi) continue;
          // After the horizon every obstacle is at rest, so the edge test stops changing.
          const long last = std::min(hi, std::max(lo, static_cast<long>(horizon_)));
          for (long td = lo; td <= last; ++td) {
            const double t0 = td * motion_.tick;
            const double t1 = (td + move) * motion_.tick;
            if (!clear_of_all(grid_.center(here), t0, grid_.center(nb), t1, radius_, obstacles_)) continue;
            push({cur.leg, ni, static_cast<int>(k), static_cast<int>(td + move), static_cast<int>(td), top.id});
            break;
          }
        }
      }
    }
    return std::nullopt;
  }

 private:
  SippResult build(const std::vector<SearchState>& states, int goal_id, const std::vector<SippGoal>& goals) {
    std::vector<int> chain;
    for (int i = goal_id; i >= 0; i = states[i].parent) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());

    SippResult res;
    TimedPath& p = res.path;
    p.radius = radius_;
    auto center = [&](int cell) { return grid_.center({cell % grid_.side, cell / grid_.side}); };
    auto emit = [&](Vec2 pos, int tick, bool hold) {
      const double t = tick * motion_.tick;
      if (!p.waypoints.empty() && tick * motion_.tick <= p.waypoints.back().time) {
        p.waypoints.back().hold = p.waypoints.back().hold || hold;
        return;
      }
      p.waypoints.push_back({pos, t, hold});
    };
    emit(center(states[chain[0]].cell), 0, false);
    for (std::size_t i = 1; i < chain.size(); ++i) {
      const SearchState& st = states[chain[i]];
      const SearchState& par = states[chain[i - 1]];
      if (st.leg != par.leg) {
        res.arrival_ticks.push_back(par.t);
        emit(center(par.cell), par.t, true);
        emit(center(st.cell), st.t, false);
        if (par.leg == 0) p.pick_time = st.t * motion_.tick;
      } else {
        emit(center(par.cell), st.depart, false);
        emit(center(st.cell), st.t, false);
      }
    }
    const SearchState& last = states[chain.back()];
    res.arrival_ticks.push_back(last.t);
    emit(center(last.cell), last.t, true);
    emit(center(last.cell), last.t + goals.back().dwell_ticks, false);
    p.place_time = (last.t + goals.back().dwell_ticks) * motion_.tick;
    if (goals.size() == 1) p.pick_time = -1.0;
    return res;
  }

  const PlanningGrid& grid_;
  const std::vector<TimedPath>& obstacles_;
  double radius_;
  MotionModel motion_;
  std::vector<std::vector<TickInterval>> intervals_;
  std::vector<char> computed_;
  int horizon_ = 0;
  int straight_ = 1;
  int diagonal_ = 1;
};

}  // namespace

std::optional<SippResult> sipp_plan(const PlanningGrid& grid, Cell start, const std::vector<SippGoal>& goals,
                                    const std::vector<TimedPath>& obstacles, double radius,
                                    const MotionModel& motion, const SippOptions& options) {
  Sipp search(grid, obstacles, radius, motion);
  auto res = search.run(start, goals, options.max_expansions);
  if (res && options.smooth) res->path = smooth_path(res->path, grid, obstacles, motion);
  return res;
}

TimedPath smooth_path(const TimedPath& path, const PlanningGrid& grid,
                      const std::vector<TimedPath>& obstacles, const MotionModel& motion) {
  std::vector<Waypoint> w = path.waypoints;
  if (w.size() < 3) return path;
  const std::size_t n = w.size();
  auto still = [&](std::size_t a, std::size_t b) { return w[a].position == w[b].position; };
  auto anchor = [&](std::size_t i) {
    return i == 0 || i + 1 == n || w[i].hold || still(i - 1, i) || still(i, i + 1);
  };
  auto index_of = [&](double t) -> std::size_t {
    for (std::size_t i = 0; i < n; ++i)
      if (w[i].time == t) return i;
    return n;
  };
  const std::size_t pick_idx = path.pick_time >= 0 ? index_of(path.pick_time) : n;
  const std::size_t place_idx = path.place_time >= 0 ? index_of(path.place_time) : n;
  const double radius = path.radius;

  auto remainder_clear = [&](std::size_t j, double shift) {
    for (std::size_t k = j; k + 1 < n; ++k)
      if (!clear_of_all(w[k].position, w[k].time - shift, w[k + 1].position, w[k + 1].time - shift, radius, obstacles))
        return false;
    return clear_of_all(w[n - 1].position, w[n - 1].time - shift, w[n - 1].position, kInf, radius, obstacles);
  };

  std::vector<Waypoint> out{w[0]};
  std::size_t i = 0;
  while (i + 1 < n) {
    if (still(i, i + 1)) {
      out.push_back(w[i + 1]);
      ++i;
      continue;
    }
    std::size_t c = i + 1;
    while (c + 1 < n && !anchor(c)) ++c;
    bool advanced = false;
    for (std::size_t j = c; j >= i + 2 && !advanced; --j) {
      const double len = distance(w[i].position, w[j].position);
      if (len < 1e-9 || !line_of_sight(grid, w[i].position, w[j].position)) continue;
      const double fast = w[i].time + len / motion.speed;
      const double shift = w[j].time - fast;
      if (shift <= 1e-12) {
        if (!clear_of_all(w[i].position, w[i].time, w[j].position, w[j].time, radius, obstacles)) continue;
        out.push_back(w[j]);
      } else if (clear_of_all(w[i].position, w[i].time, w[j].position, fast, radius, obstacles) &&
                 remainder_clear(j, shift)) {
        for (std::size_t k = j; k < n; ++k) w[k].time -= shift;
        out.push_back(w[j]);
      } else if (clear_of_all(w[i].position, w[i].time, w[j].position, fast, radius, obstacles) &&
                 clear_of_all(w[j].position, fast, w[j].position, w[j].time, radius, obstacles)) {
        out.push_back({w[j].position, fast, false});
        out.push_back(w[j]);
      } else {
        continue;
      }
      i = j;
      advanced = true;
    }
    if (!advanced) {
      out.push_back(w[i + 1]);
      ++i;
    }
  }

  TimedPath res = path;
  res.waypoints = std::move(out);
  if (pick_idx < n) res.pick_time = w[pick_idx].time;
  if (place_idx < n) res.place_time = w[place_idx].time;
  return res;
}

namespace {

std::optional<TimedPath> plan_one(const Scene& scene, const PlanRequest& req,
                                  const std::vector<TimedPath>& obstacles, const MapfOptions& options) {
  const AgentState* agent = scene.find_agent(req.agent_id);
  if (!agent) throw std::invalid_argument("unknown agent " + std::to_string(req.agent_id));
  std::optional<int> carried;
  if (req.object_id >= 0) carried = req.object_id;
  const PlanningGrid grid = agent_grid(scene, *agent, options.patches, carried);
  const Cell start = grid.cell_of(agent->position);
  const Cell pick = grid.cell_of(req.pick_position);
  const Cell place = grid.cell_of(req.place_position);
  if (!grid.placeable[place] && !(place == start && req.object_id < 0)) return std::nullopt;
  const int dwell = options.motion.dwell_ticks();
  std::vector<SippGoal> goals;
  if (req.object_id >= 0) goals.push_back({pick, dwell});
  goals.push_back({place, req.object_id >= 0 ? dwell : 0});
  auto res = sipp_plan(grid, start, goals, obstacles, agent->radius, options.motion, options.sipp);
  if (!res) return std::nullopt;
  res->path.agent_id = req.agent_id;
  return res->path;
}

// Obstacles for the agent at position `level` of `order`: planned paths of earlier
// agents plus everyone else at rest where they stand.
std::vector<TimedPath> obstacles_for(const Scene& scene, const std::vector<PlanRequest>& requests,
                                     const std::vector<int>& order, std::size_t level,
                                     const std::vector<TimedPath>& planned) {
  std::vector<TimedPath> obs(planned.begin(), planned.begin() + static_cast<long>(level));
  const int self = requests[order[level]].agent_id;
  std::vector<int> done;
  for (std::size_t i = 0; i < level; ++i) done.push_back(requests[order[i]].agent_id);
  for (const auto& a : scene.agents) {
    if (a.id == self || std::find(done.begin(), done.end(), a.id) != done.end()) continue;
    obs.push_back(stationary_path(a.id, a.position, a.radius));
  }
  return obs;
}

JointPlan summarize(std::vector<TimedPath> paths) {
  JointPlan plan;
  for (const auto& p : paths) {
    plan.total_time += p.total_time();
    plan.makespan = std::max(plan.makespan, p.total_time());
    plan.total_length += p.total_length();
  }
  plan.paths = std::move(paths);
  return plan;
}

std::optional<JointPlan> plan_in_order(const Scene& scene, const std::vector<PlanRequest>& requests,
                                       const std::vector<int>& order, const MapfOptions& options) {
  std::vector<TimedPath> planned;
  for (std::size_t level = 0; level < order.size(); ++level) {
    auto path = plan_one(scene, requests[order[level]], obstacles_for(scene, requests, order, level, planned), options);
    if (!path) return std::nullopt;
    planned.push_back(std::move(*path));
  }
  std::vector<TimedPath> paths(requests.size());
  for (std::size_t level = 0; level < order.size(); ++level) paths[order[level]] = planned[level];
  return summarize(std::move(paths));
}

std::vector<int> priority_order(const std::vector<PlanRequest>& requests) {
  std::vector<int> order(requests.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (requests[a].priority != requests[b].priority) return requests[a].priority < requests[b].priority;
    return requests[a].agent_id < requests[b].agent_id;
  });
  return order;
}

}  // namespace

std::optional<JointPlan> plan_joint(const Scene& scene, const std::vector<PlanRequest>& requests,
                                    const MapfOptions& options) {
  for (std::size_t i = 0; i < requests.size(); ++i)
    for (std::size_t j = i + 1; j < requests.size(); ++j)
      if (requests[i].agent_id == requests[j].agent_id)
        throw std::invalid_argument("plan_joint requests must have distinct agents");
  return plan_in_order(scene, requests, priority_order(requests), options);
}

bool region_on_target(const Scene& scene, const Scene& target, int object_id, Vec2 place,
                      const std::vector<int>& moving_objects, double tolerance) {
  const ObjectState* obj = scene.find_object(object_id);
  if (!obj) return false;
  Scene rest = scene;
  rest.objects.erase(std::remove_if(rest.objects.begin(), rest.objects.end(),
                                    [&](const ObjectState& o) {
                                      return std::find(moving_objects.begin(), moving_objects.end(), o.id) !=
                                             moving_objects.end();
                                    }),
                     rest.objects.end());
  for (const auto& slot : target_slots(rest, target, tolerance))
    if (slot.class_label == obj->class_label && !slot.claimed_by && distance(slot.position, place) <= tolerance)
      return true;
  return false;
}

namespace {

struct Ranked {
  int on_target = -1;
  double total_time = kInf;
  bool better_than(const Ranked& o) const {
    if (on_target != o.on_target) return on_target > o.on_target;
    return total_time < o.total_time;
  }
};

class RegionSearch {
 public:
  RegionSearch(const Scene& scene, const Scene& target, const std::vector<PickAssignment>& pairs,
               const std::vector<std::vector<RegionCandidate>>& candidates, const MapfOptions& options)
      : scene_(scene), pairs_(pairs), options_(options) {
    for (const auto& p : pairs) moving_.push_back(p.object_id);
    places_.resize(pairs.size());
    options_valid_.resize(pairs.size());
    on_target_.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const ObjectState* obj = scene.find_object(pairs[i].object_id);
      if (!obj) throw std::invalid_argument("unknown object " + std::to_string(pairs[i].object_id));
      for (std::size_t c = 0; c < candidates[i].size(); ++c) {
        const Vec2 place = candidates[i][c].center;
        places_[i].push_back(place);
        on_target_[i].push_back(region_on_target(scene, target, obj->id, place, moving_, options.tolerance));
        options_valid_[i].push_back(drop_clear(*obj, place));
      }
    }
  }

  std::optional<RegionSelection> run() {
    std::vector<int> identity(pairs_.size());
    std::iota(identity.begin(), identity.end(), 0);
    std::stable_sort(identity.begin(), identity.end(),
                     [&](int a, int b) { return pairs_[a].agent_id < pairs_[b].agent_id; });
    std::vector<int> choice(pairs_.size(), -1);
    std::vector<TimedPath> planned;
    dfs(identity, 0, choice, planned);

    // Other priority orders only for combinations that could outrank the current best.
    std::stable_sort(infeasible_.begin(), infeasible_.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::vector<int>> orders;
    std::vector<int> perm = identity;
    while (static_cast<int>(orders.size()) + 1 < options_.max_permutations &&
           std::next_permutation(perm.begin(), perm.end(),
                                 [&](int a, int b) { return pairs_[a].agent_id < pairs_[b].agent_id; }))
      orders.push_back(perm);
    std::optional<int> settled;
    for (const auto& [count, combo] : infeasible_) {
      if (best_ && count <= best_rank_.on_target) break;
      if (settled && count < *settled) break;
      for (const auto& order : orders) {
        auto plan = plan_in_order(scene_, requests_for(combo), order, options_);
        if (!plan) continue;
        consider(combo, count, std::move(*plan));
        settled = count;
        break;
      }
    }
    return best_;
  }

 private:
  bool drop_clear(const ObjectState& obj, Vec2 place) const {
    if (distance(place, obj.position) <= options_.tolerance) return false;
    const double L = scene_.arena_size;
    if (place.x < obj.radius || place.y < obj.radius || place.x > L - obj.radius || place.y > L - obj.radius)
      return false;
    for (const auto& o : scene_.objects) {
      if (std::find(moving_.begin(), moving_.end(), o.id) != moving_.end()) continue;
      if (distance(o.position, place) <= o.radius + obj.radius) return false;
    }
    for (const auto& ob : scene_.obstacles)
      if (ob.distance_to(place) <= obj.radius) return false;
    return true;
  }

  bool compatible(int pair, int cand, const std::vector<int>& choice) const {
    const ObjectState* obj = scene_.find_object(pairs_[pair].object_id);
    for (std::size_t q = 0; q < choice.size(); ++q) {
      if (choice[q] < 0 || static_cast<int>(q) == pair) continue;
      const ObjectState* other = scene_.find_object(pairs_[q].object_id);
      if (distance(places_[q][choice[q]], places_[pair][cand]) <= obj->radius + other->radius) return false;
    }
    return true;
  }

  std::vector<PlanRequest> requests_for(const std::vector<int>& combo) const {
    std::vector<PlanRequest> reqs;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const ObjectState* obj = scene_.find_object(pairs_[i].object_id);
      reqs.push_back({pairs_[i].agent_id, obj->id, obj->position, places_[i][combo[i]], static_cast<int>(i)});
    }
    return reqs;
  }

  int count_on_target(const std::vector<int>& combo) const {
    int n = 0;
    for (std::size_t i = 0; i < combo.size(); ++i) n += on_target_[i][combo[i]] ? 1 : 0;
    return n;
  }

  void consider(const std::vector<int>& combo, int count, JointPlan plan) {
    Ranked r{count, plan.total_time};
    if (best_ && !r.better_than(best_rank_)) return;
    RegionSelection sel;
    sel.chosen = combo;
    for (std::size_t i = 0; i < combo.size(); ++i) sel.regions.push_back(places_[i][combo[i]]);
    sel.on_target = count;
    sel.plan = std::move(plan);
    best_ = std::move(sel);
    best_rank_ = r;
  }

  // Records every full completion of `choice` as infeasible in the default order.
  void mark_infeasible(std::vector<int>& choice, const std::vector<int>& order, std::size_t level) {
    if (level == order.size()) {
      infeasible_.emplace_back(count_on_target(choice), choice);
      return;
    }
    const int pair = order[level];
    for (std::size_t c = 0; c < places_[pair].size(); ++c) {
      if (!options_valid_[pair][c] || !compatible(pair, static_cast<int>(c), choice)) continue;
      choice[pair] = static_cast<int>(c);
      mark_infeasible(choice, order, level + 1);
      choice[pair] = -1;
    }
  }

  void dfs(const std::vector<int>& order, std::size_t level, std::vector<int>& choice,
           std::vector<TimedPath>& planned) {
    if (level == order.size()) {
      std::vector<TimedPath> paths(order.size());
      for (std::size_t l = 0; l < order.size(); ++l) paths[order[l]] = planned[l];
      consider(choice, count_on_target(choice), summarize(std::move(paths)));
      return;
    }
    const int pair = order[level];
    for (std::size_t c = 0; c < places_[pair].size(); ++c) {
      if (!options_valid_[pair][c] || !compatible(pair, static_cast<int>(c), choice)) continue;
      choice[pair] = static_cast<int>(c);
      const auto reqs = requests_for_partial(choice);
      auto path = plan_one(scene_, reqs[pair], obstacles_for(scene_, reqs, order, level, planned), options_);
      if (path) {
        planned.push_back(std::move(*path));
        dfs(order, level + 1, choice, planned);
        planned.pop_back();
      } else {
        mark_infeasible(choice, order, level + 1);
      }
      choice[pair] = -1;
    }
  }

  std::vector<PlanRequest> requests_for_partial(const std::vector<int>& choice) const {
    std::vector<PlanRequest> reqs;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const ObjectState* obj = scene_.find_object(pairs_[i].object_id);
      const Vec2 place = choice[i] >= 0 ? places_[i][choice[i]] : obj->position;
      reqs.push_back({pairs_[i].agent_id, obj->id, obj->position, place, static_cast<int>(i)});
    }
    return reqs;
  }

  const Scene& scene_;
  const std::vector<PickAssignment>& pairs_;
  MapfOptions options_;
  std::vector<int> moving_;
  std::vector<std::vector<Vec2>> places_;
  std::vector<std::vector<char>> on_target_;
  std::vector<std::vector<char>> options_valid_;
  std::vector<std::pair<int, std::vector<int>>> infeasible_;
  std::optional<RegionSelection> best_;
  Ranked best_rank_;
};

}  // namespace

std::optional<RegionSelection> select_regions(const Scene& scene, const Scene& target,
                                              const std::vector<PickAssignment>& pairs,
                                              const std::vector<std::vector<RegionCandidate>>& candidates,
                                              const MapfOptions& options) {
  if (pairs.size() != candidates.size()) throw std::invalid_argument("one candidate list per pair required");
  if (pairs.empty()) return std::nullopt;
  RegionSearch search(scene, target, pairs, candidates, options);
  return search.run();
}

nlohmann::json path_to_json(const TimedPath& path) {
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& w : path.waypoints) wps.push_back({{"x", w.position.x}, {"y", w.position.y}, {"t", w.time}});
  return {{"agent", path.agent_id},         {"waypoints", wps},
          {"length", path.total_length()},  {"duration", path.total_time()},
          {"pick_time", path.pick_time},    {"place_time", path.place_time},
          {"radius", path.radius}};
}

TimedPath path_from_json(const nlohmann::json& j) {
  TimedPath p;
  p.agent_id = j.at("agent").get<int>();
  p.radius = j.value("radius", 0.2);
  p.pick_time = j.value("pick_time", -1.0);
  p.place_time = j.value("place_time", -1.0);
  for (const auto& w : j.at("waypoints"))
    p.waypoints.push_back({{w.at("x").get<double>(), w.at("y").get<double>()}, w.at("t").get<double>(), false});
  return p;
}

}  // namespace maner
