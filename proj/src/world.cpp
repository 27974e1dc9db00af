#include "maner/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace maner {

std::string to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::red: return "red";
    case ObjectClass::green: return "green";
    case ObjectClass::blue: return "blue";
  }
  return "red";
}

ObjectClass object_class_from_string(const std::string& s) {
  if (s == "red") return ObjectClass::red;
  if (s == "green") return ObjectClass::green;
  if (s == "blue") return ObjectClass::blue;
  throw std::invalid_argument("unknown object class: " + s);
}

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::shuffle: return "shuffle";
    case TaskKind::sort: return "sort";
    case TaskKind::random: return "random";
  }
  return "random";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "shuffle") return TaskKind::shuffle;
  if (s == "sort") return TaskKind::sort;
  if (s == "random") return TaskKind::random;
  throw std::invalid_argument("unknown task kind: " + s);
}

Obstacle Obstacle::make_rect(Vec2 center, Vec2 half_extent) {
  Obstacle o;
  o.shape = Shape::rect;
  o.center = center;
  o.half_extent = half_extent;
  return o;
}

Obstacle Obstacle::make_disc(Vec2 center, double radius) {
  Obstacle o;
  o.shape = Shape::disc;
  o.center = center;
  o.radius = radius;
  return o;
}

Rect Obstacle::bounds() const {
  if (shape == Shape::rect) return {center - half_extent, center + half_extent};
  return {{center.x - radius, center.y - radius}, {center.x + radius, center.y + radius}};
}

double Obstacle::distance_to(Vec2 p) const {
  if (shape == Shape::rect) return distance(p, bounds());
  return std::max(0.0, distance(p, center) - radius);
}

double Obstacle::distance_to(const Rect& r) const {
  if (shape == Shape::disc) return std::max(0.0, distance(center, r) - radius);
  const Rect b = bounds();
  const double dx = std::max({b.min.x - r.max.x, r.min.x - b.max.x, 0.0});
  const double dy = std::max({b.min.y - r.max.y, r.min.y - b.max.y, 0.0});
  return std::hypot(dx, dy);
}

const ObjectState* Scene::find_object(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

ObjectState* Scene::find_object(int id) {
  for (auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const AgentState* Scene::find_agent(int id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

AgentState* Scene::find_agent(int id) {
  for (auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

void RandomizationRanges::validate() const {
  if (!(arena_min > 0) || arena_min > arena_max)
    throw std::invalid_argument("arena range must satisfy 0 < min <= max");
  if (agents_min < 1 || agents_min > agents_max)
    throw std::invalid_argument("agent range must satisfy 1 <= min <= max");
  if (object_counts.empty()) throw std::invalid_argument("object_counts must not be empty");
  if (obstacles_min < 0 || obstacles_min > obstacles_max)
    throw std::invalid_argument("obstacle range must satisfy 0 <= min <= max");
  if (gray_min < 128 || gray_max > 255 || gray_min > gray_max)
    throw std::invalid_argument("gray range must lie within [128, 255]");
  if (arena_size && !(*arena_size > 0)) throw std::invalid_argument("arena size must be positive");
  if (agents && *agents < 1) throw std::invalid_argument("agent count must be >= 1");
  if (objects && *objects < 1) throw std::invalid_argument("object count must be >= 1");
  if (obstacles && *obstacles < 0) throw std::invalid_argument("obstacle count must be >= 0");
  const int max_agents = agents ? *agents : agents_max;
  const int min_objects =
      objects ? *objects : *std::min_element(object_counts.begin(), object_counts.end());
  if (min_objects <= max_agents)
    throw std::invalid_argument("object count must exceed agent count");
}

namespace {

// Generated entities are kept apart by a clearance and every object/agent sits in a
// patch whose square is clear of walls and obstacles by one agent radius, so that
// an agent can stand on it.
class Placer {
 public:
  Placer(std::mt19937_64& rng, double arena, int patches, double agent_radius)
      : rng_(rng), arena_(arena), cell_(arena / patches), patches_(patches),
        agent_radius_(agent_radius) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  bool standable(Vec2 p, const std::vector<Obstacle>& obstacles) const {
    const int c = static_cast<int>(std::floor(p.x / cell_));
    const int r = static_cast<int>(std::floor(p.y / cell_));
    if (c < 0 || r < 0 || c >= patches_ || r >= patches_) return false;
    if (!main_.empty()) return main_[static_cast<std::size_t>(r * patches_ + c)] != 0;
    return cell_standable(c, r, obstacles);
  }

  // Restricts standable patches to the largest 8-connected region so that every entity
  // is reachable from every other one when movable objects are ignored.
  void keep_main_component(const std::vector<Obstacle>& obstacles) {
    const int n = patches_;
    std::vector<char> ok(static_cast<std::size_t>(n * n), 0);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) ok[static_cast<std::size_t>(r * n + c)] = cell_standable(c, r, obstacles);
    std::vector<int> label(ok.size(), -1);
    std::vector<int> sizes;
    for (int start = 0; start < n * n; ++start) {
      if (!ok[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      std::vector<int> stack{start};
      label[static_cast<std::size_t>(start)] = id;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        ++sizes.back();
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int c = cur % n + dc, r = cur / n + dr;
            if (c < 0 || r < 0 || c >= n || r >= n) continue;
            const auto idx = static_cast<std::size_t>(r * n + c);
            if (!ok[idx] || label[idx] >= 0) continue;
            label[idx] = id;
            stack.push_back(static_cast<int>(idx));
          }
      }
    }
    main_.assign(ok.size(), 0);
    if (sizes.empty()) return;
    const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t i = 0; i < ok.size(); ++i) main_[i] = label[i] == best;
  }

 private:
  bool cell_standable(int c, int r, const std::vector<Obstacle>& obstacles) const {
    const Rect sq{{c * cell_, r * cell_}, {(c + 1) * cell_, (r + 1) * cell_}};
    if (sq.min.x < agent_radius_ || sq.min.y < agent_radius_ ||
        sq.max.x > arena_ - agent_radius_ || sq.max.y > arena_ - agent_radius_)
      return false;
    for (const auto& o : obstacles)
      if (o.distance_to(sq) < agent_radius_) return false;
    return true;
  }


 public:
  Vec2 patch_center(int c, int r) const { return {(c + 0.5) * cell_, (r + 0.5) * cell_}; }
  int patches() const { return patches_; }
  double arena() const { return arena_; }

 private:
  std::vector<char> main_;
  std::mt19937_64& rng_;
  double arena_;
  double cell_;
  int patches_;
  double agent_radius_;
};

bool disc_clear(Vec2 p, double r, const std::vector<Obstacle>& obstacles,
                const std::vector<std::pair<Vec2, double>>& discs, double arena) {
  if (p.x - r < kGenerationClearance || p.y - r < kGenerationClearance ||
      p.x + r > arena - kGenerationClearance || p.y + r > arena - kGenerationClearance)
    return false;
  for (const auto& o : obstacles)
    if (o.distance_to(p) <= r + kGenerationClearance) return false;
  for (const auto& [q, rq] : discs)
    if (distance(p, q) <= r + rq + kGenerationClearance) return false;
  return true;
}

constexpr int kLayoutRounds = 20;

[[noreturn]] void crowded() { throw GenerationError("arena too crowded"); }

std::vector<Obstacle> place_obstacles(Placer& placer, int count) {
  std::vector<Obstacle> out;
  const double arena = placer.arena();
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Obstacle o;
      if (placer.uniform(0.0, 1.0) < 0.5) {
        const Vec2 half{placer.uniform(0.1, 0.35), placer.uniform(0.1, 0.35)};
        o = Obstacle::make_rect({placer.uniform(half.x, arena - half.x),
                                 placer.uniform(half.y, arena - half.y)},
                                half);
      } else {
        const double r = placer.uniform(0.1, 0.3);
        o = Obstacle::make_disc({placer.uniform(r, arena - r), placer.uniform(r, arena - r)}, r);
      }
      bool ok = true;
      for (const auto& other : out) {
        const double gap = o.shape == Obstacle::Shape::disc
                               ? other.distance_to(o.center) - o.radius
                               : other.distance_to(o.bounds());
        if (gap <= kGenerationClearance) {
          ok = false;
          break;
        }
      }
      if (ok) {
        out.push_back(o);
        placed = true;
      }
    }
    if (!placed) crowded();
  }
  return out;
}

std::vector<AgentState> place_agents(Placer& placer, int count,
                                     const std::vector<Obstacle>& obstacles) {
  std::vector<AgentState> out;
  const int n = placer.patches();
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      AgentState a;
      a.id = i;
      a.position = placer.patch_center(placer.uniform_int(0, n - 1), placer.uniform_int(0, n - 1));
      a.heading = wrap_angle(placer.uniform(-kPi, kPi));
      std::vector<std::pair<Vec2, double>> discs;
      for (const auto& b : out) discs.emplace_back(b.position, b.radius);
      if (placer.standable(a.position, obstacles) &&
          disc_clear(a.position, a.radius, obstacles, discs, placer.arena())) {
        out.push_back(a);
        placed = true;
      }
    }
    if (!placed) crowded();
  }
  return out;
}

// Samples a position for a disc of radius r that is clear of obstacles, the given
// discs, and standable. `sampler` proposes candidate points.
template <typename Sampler>
std::optional<Vec2> sample_clear(Placer& placer, double r, const std::vector<Obstacle>& obstacles,
                                 const std::vector<std::pair<Vec2, double>>& discs,
                                 Sampler&& sampler, int attempts) {
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const Vec2 p = sampler();
    if (disc_clear(p, r, obstacles, discs, placer.arena()) && placer.standable(p, obstacles))
      return p;
  }
  return std::nullopt;
}

std::vector<ObjectState> place_objects_freely(Placer& placer, const std::vector<ObjectState>& proto,
                                              const std::vector<Obstacle>& obstacles,
                                              std::vector<std::pair<Vec2, double>> discs) {
  std::vector<ObjectState> out;
  const double arena = placer.arena();
  for (const auto& o : proto) {
    auto p = sample_clear(
        placer, o.radius, obstacles, discs,
        [&] { return Vec2{placer.uniform(0.0, arena), placer.uniform(0.0, arena)}; },
        kPlacementAttempts);
    if (!p) crowded();
    ObjectState s = o;
    s.position = *p;
    discs.emplace_back(s.position, s.radius);
    out.push_back(s);
  }
  return out;
}

// Sorting targets: each class is gathered either around an anchor point (cluster) or
// along a line through an anchor (row). The pattern is drawn per scenario.
std::vector<ObjectState> sort_targets(Placer& placer, const std::vector<ObjectState>& proto,
                                      const std::vector<Obstacle>& obstacles) {
  const double arena = placer.arena();
  const bool rows = placer.uniform(0.0, 1.0) < 0.5;
  std::map<ObjectClass, std::vector<const ObjectState*>> by_class;
  for (const auto& o : proto) by_class[o.class_label].push_back(&o);

  std::vector<ObjectState> out;
  std::vector<std::pair<Vec2, double>> discs;
  for (const auto& [cls, members] : by_class) {
    bool done = false;
    for (int anchor_try = 0; anchor_try < 200 && !done; ++anchor_try) {
      Vec2 anchor{placer.uniform(0.6, arena - 0.6), placer.uniform(0.6, arena - 0.6)};
      for (int i = 0; i < 50 && !placer.standable(anchor, obstacles); ++i)
        anchor = {placer.uniform(0.6, arena - 0.6), placer.uniform(0.6, arena - 0.6)};
      const double angle = placer.uniform(0.0, kPi);
      const Vec2 dir{std::cos(angle), std::sin(angle)};
      auto local_discs = discs;
      std::vector<ObjectState> local;
      bool ok = true;
      for (std::size_t i = 0; i < members.size() && ok; ++i) {
        const ObjectState& o = *members[i];
        std::optional<Vec2> p;
        if (rows) {
          // Fill slots outward from the anchor, alternating sides, with a little jitter.
          const double spacing = 2 * o.radius + kGenerationClearance + 0.1;
          const double offset =
              spacing * static_cast<double>((i + 1) / 2) * (i % 2 == 0 ? 1.0 : -1.0);
          p = sample_clear(
              placer, o.radius, obstacles, local_discs,
              [&] {
                const double jitter = placer.uniform(-0.08, 0.08);
                return anchor + dir * (offset + jitter);
              },
              50);
        } else {
          double spread = 0.5;
          p = sample_clear(
              placer, o.radius, obstacles, local_discs,
              [&] {
                spread = std::min(spread + 0.002, 1.5);
                const double a = placer.uniform(0.0, 2 * kPi);
                const double d = spread * std::sqrt(placer.uniform(0.0, 1.0));
                return anchor + Vec2{std::cos(a), std::sin(a)} * d;
              },
              500);
        }
        if (!p) {
          ok = false;
          break;
        }
        ObjectState s = o;
        s.position = *p;
        local_discs.emplace_back(s.position, s.radius);
        local.push_back(s);
      }
      if (ok) {
        discs = std::move(local_discs);
        out.insert(out.end(), local.begin(), local.end());
        done = true;
      }
    }
    if (!done) crowded();
  }
  std::sort(out.begin(), out.end(),
            [](const ObjectState& a, const ObjectState& b) { return a.id < b.id; });
  return out;
}

}  // namespace

Scenario generate_scenario(TaskKind task_kind, const RandomizationRanges& ranges,
                           std::uint64_t seed, int patches_per_side) {
  ranges.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  Scenario sc;
  sc.task_kind = task_kind;
  sc.seed = seed;
  Scene& start = sc.start;
  start.arena_size =
      ranges.arena_size ? *ranges.arena_size : uniform(ranges.arena_min, ranges.arena_max);
  start.arena_gray = uniform_int(ranges.gray_min, ranges.gray_max);
  const int m = ranges.agents ? *ranges.agents : uniform_int(ranges.agents_min, ranges.agents_max);
  const int n = ranges.objects
                    ? *ranges.objects
                    : ranges.object_counts[static_cast<std::size_t>(
                          uniform_int(0, static_cast<int>(ranges.object_counts.size()) - 1))];
  const int k = ranges.obstacles ? *ranges.obstacles
                                 : uniform_int(ranges.obstacles_min, ranges.obstacles_max);
  if (n <= m) throw std::invalid_argument("object count must exceed agent count");

  std::vector<ObjectClass> labels;
  for (int i = 0; i < n; ++i) labels.push_back(static_cast<ObjectClass>(i % kClassCount));
  std::shuffle(labels.begin(), labels.end(), rng);

  // Whole layouts are redrawn a bounded number of times before giving up.
  for (int round = 0;; ++round) {
    try {
      Placer placer(rng, start.arena_size, patches_per_side, AgentState{}.radius);
      start.obstacles = place_obstacles(placer, k);
      placer.keep_main_component(start.obstacles);
      start.agents = place_agents(placer, m, start.obstacles);

      std::vector<ObjectState> proto(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        proto[static_cast<std::size_t>(i)].id = i;
        proto[static_cast<std::size_t>(i)].class_label = labels[static_cast<std::size_t>(i)];
      }

      std::vector<std::pair<Vec2, double>> agent_discs;
      for (const auto& a : start.agents) agent_discs.emplace_back(a.position, a.radius);
      start.objects = place_objects_freely(placer, proto, start.obstacles, agent_discs);

      Scene& target = sc.target;
      target.arena_size = start.arena_size;
      target.arena_gray = start.arena_gray;
      target.obstacles = start.obstacles;
      switch (task_kind) {
        case TaskKind::shuffle: {
          std::vector<std::size_t> perm(start.objects.size());
          for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
          std::shuffle(perm.begin(), perm.end(), rng);
          target.objects = start.objects;
          for (std::size_t i = 0; i < perm.size(); ++i)
            target.objects[i].position = start.objects[perm[i]].position;
          break;
        }
        case TaskKind::sort:
          target.objects = sort_targets(placer, proto, start.obstacles);
          break;
        case TaskKind::random:
          target.objects = place_objects_freely(placer, proto, start.obstacles, {});
          break;
      }
      break;
    } catch (const GenerationError&) {
      if (round + 1 >= kLayoutRounds) throw;
    }
  }
  return sc;
}

void validate_scene(const Scene& scene) {
  const double L = scene.arena_size;
  if (!(L > 0)) throw InvalidScene("arena size must be positive");
  if (scene.arena_gray < 0 || scene.arena_gray > 255) throw InvalidScene("arena gray out of range");
  auto inside = [&](Vec2 p, double r) {
    return p.x - r >= 0 && p.y - r >= 0 && p.x + r <= L && p.y + r <= L;
  };
  std::vector<std::pair<Vec2, double>> discs;
  for (const auto& o : scene.objects) {
    if (!(o.radius > 0)) throw InvalidScene("object radius must be positive");
    if (!inside(o.position, o.radius)) throw InvalidScene("object outside arena");
    discs.emplace_back(o.position, o.radius);
  }
  for (const auto& a : scene.agents) {
    if (!(a.radius > 0)) throw InvalidScene("agent radius must be positive");
    if (!inside(a.position, a.radius)) throw InvalidScene("agent outside arena");
    if (a.heading < -kPi || a.heading >= kPi) throw InvalidScene("agent heading out of range");
    discs.emplace_back(a.position, a.radius);
  }
  for (const auto& ob : scene.obstacles) {
    const Rect b = ob.bounds();
    if (b.min.x < 0 || b.min.y < 0 || b.max.x > L || b.max.y > L)
      throw InvalidScene("obstacle outside arena");
    for (const auto& [p, r] : discs)
      if (ob.distance_to(p) < r) throw InvalidScene("entity overlaps an obstacle");
  }
  for (std::size_t i = 0; i < discs.size(); ++i)
    for (std::size_t j = i + 1; j < discs.size(); ++j)
      if (distance(discs[i].first, discs[j].first) <= discs[i].second + discs[j].second)
        throw InvalidScene("entities overlap");
}

void validate_scenario(const Scenario& scenario) {
  validate_scene(scenario.start);
  validate_scene(scenario.target);
  if (!scenario.target.agents.empty()) throw InvalidScene("target scene must not contain agents");
  if (scenario.start.objects.size() <= scenario.start.agents.size())
    throw InvalidScene("object count must exceed agent count");
  auto multiset = [](const Scene& s) {
    std::vector<std::pair<int, double>> v;
    for (const auto& o : s.objects) v.emplace_back(static_cast<int>(o.class_label), o.radius);
    std::sort(v.begin(), v.end());
    return v;
  };
  if (multiset(scenario.start) != multiset(scenario.target))
    throw InvalidScene("start and target object multisets differ");
}

std::vector<TargetSlot> target_slots(const Scene& current, const Scene& target, double tolerance) {
  std::vector<TargetSlot> slots;
  std::vector<char> object_used(current.objects.size(), 0);
  for (std::size_t t = 0; t < target.objects.size(); ++t) {
    const auto& tgt = target.objects[t];
    TargetSlot slot;
    slot.target_index = static_cast<int>(t);
    slot.class_label = tgt.class_label;
    slot.position = tgt.position;
    double best_claim = tolerance;
    std::size_t claim_idx = current.objects.size();
    double best_taken = 1e300;
    for (std::size_t i = 0; i < current.objects.size(); ++i) {
      const auto& o = current.objects[i];
      const double d = distance(o.position, tgt.position);
      if (o.class_label == tgt.class_label && !object_used[i] && d <= best_claim) {
        best_claim = d;
        claim_idx = i;
      }
      if (d < o.radius + tgt.radius && d < best_taken) {
        best_taken = d;
        slot.physically_taken = o.id;
      }
    }
    if (claim_idx < current.objects.size()) {
      object_used[claim_idx] = 1;
      slot.claimed_by = current.objects[claim_idx].id;
    }
    slots.push_back(slot);
  }
  return slots;
}

int placed_object_count(const Scene& current, const Scene& target, double tolerance) {
  int count = 0;
  for (const auto& s : target_slots(current, target, tolerance))
    if (s.claimed_by) ++count;
  return count;
}

bool is_placed(const Scene& current, const Scene& target, int object_id, double tolerance) {
  for (const auto& s : target_slots(current, target, tolerance))
    if (s.claimed_by && *s.claimed_by == object_id) return true;
  return false;
}

std::uint64_t scene_hash(const Scene& scene) {
  const std::string s = nlohmann::json(scene).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

void to_json(nlohmann::json& j, const Obstacle& o) {
  if (o.shape == Obstacle::Shape::rect) {
    j = {{"shape", "rect"}, {"x", o.center.x}, {"y", o.center.y},
         {"hw", o.half_extent.x}, {"hh", o.half_extent.y}};
  } else {
    j = {{"shape", "disc"}, {"x", o.center.x}, {"y", o.center.y}, {"r", o.radius}};
  }
}

void from_json(const nlohmann::json& j, Obstacle& o) {
  const std::string shape = j.at("shape").get<std::string>();
  const Vec2 c{j.at("x").get<double>(), j.at("y").get<double>()};
  if (shape == "rect") {
    o = Obstacle::make_rect(c, {j.at("hw").get<double>(), j.at("hh").get<double>()});
  } else if (shape == "disc") {
    o = Obstacle::make_disc(c, j.at("r").get<double>());
  } else {
    throw std::invalid_argument("unknown obstacle shape: " + shape);
  }
}

namespace {

nlohmann::json objects_json(const std::vector<ObjectState>& objects) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& o : objects)
    arr.push_back({{"id", o.id}, {"class", to_string(o.class_label)}, {"x", o.position.x},
                   {"y", o.position.y}, {"r", o.radius}});
  return arr;
}

std::vector<ObjectState> objects_from_json(const nlohmann::json& arr) {
  std::vector<ObjectState> out;
  for (const auto& e : arr) {
    ObjectState o;
    o.id = e.at("id").get<int>();
    o.class_label = object_class_from_string(e.at("class").get<std::string>());
    o.position = {e.at("x").get<double>(), e.at("y").get<double>()};
    o.radius = e.value("r", 0.1);
    out.push_back(o);
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const Scene& s) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : s.agents)
    agents.push_back({{"id", a.id}, {"x", a.position.x}, {"y", a.position.y},
                      {"theta", a.heading}, {"r", a.radius}});
  j = {{"arena_size", s.arena_size},
       {"arena_gray", s.arena_gray},
       {"objects", objects_json(s.objects)},
       {"agents", agents},
       {"obstacles", s.obstacles}};
}

void from_json(const nlohmann::json& j, Scene& s) {
  s.arena_size = j.at("arena_size").get<double>();
  s.arena_gray = j.value("arena_gray", 200);
  s.objects = objects_from_json(j.at("objects"));
  s.agents.clear();
  for (const auto& e : j.value("agents", nlohmann::json::array())) {
    AgentState a;
    a.id = e.at("id").get<int>();
    a.position = {e.at("x").get<double>(), e.at("y").get<double>()};
    a.heading = e.value("theta", 0.0);
    a.radius = e.value("r", 0.2);
    s.agents.push_back(a);
  }
  s.obstacles = j.value("obstacles", std::vector<Obstacle>{});
}

void to_json(nlohmann::json& j, const Scenario& s) {
  j = s.start;
  j["seed"] = s.seed;
  j["task_kind"] = to_string(s.task_kind);
  j["target"] = {{"objects", objects_json(s.target.objects)}};
}

void from_json(const nlohmann::json& j, Scenario& s) {
  s.start = j.get<Scene>();
  s.seed = j.value("seed", std::uint64_t{0});
  s.task_kind = task_kind_from_string(j.value("task_kind", std::string("random")));
  s.target = s.start;
  s.target.agents.clear();
  s.target.objects = objects_from_json(j.at("target").at("objects"));
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  nlohmann::json j;
  in >> j;
  Scenario s = j.get<Scenario>();
  validate_scenario(s);
  return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << nlohmann::json(scenario).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace maner
