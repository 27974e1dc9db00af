#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "maner/geometry.hpp"

namespace maner {

enum class ObjectClass { red, green, blue };
inline constexpr int kClassCount = 3;

std::string to_string(ObjectClass c);
ObjectClass object_class_from_string(const std::string& s);

struct ObjectState {
  int id = 0;
  ObjectClass class_label = ObjectClass::red;
  Vec2 position;
  double radius = 0.1;
};

struct AgentState {
  int id = 0;
  Vec2 position;
  double heading = 0.0;  // radians, [-pi, pi)
  double radius = 0.2;
};

/// Static obstacle: an axis-aligned rectangle or a disc.
struct Obstacle {
  enum class Shape { rect, disc };

  Shape shape = Shape::rect;
  Vec2 center;
  Vec2 half_extent;     // rect only
  double radius = 0.0;  // disc only

  static Obstacle make_rect(Vec2 center, Vec2 half_extent);
  static Obstacle make_disc(Vec2 center, double radius);

  Rect bounds() const;
  /// Distance from a point to the obstacle surface; zero inside.
  double distance_to(Vec2 p) const;
  /// Distance from the obstacle to a closed rectangle; zero when they intersect.
  double distance_to(const Rect& r) const;
};

struct Scene {
  double arena_size = 5.0;
  int arena_gray = 200;
  std::vector<ObjectState> objects;
  std::vector<AgentState> agents;
  std::vector<Obstacle> obstacles;

  const ObjectState* find_object(int id) const;
  ObjectState* find_object(int id);
  const AgentState* find_agent(int id) const;
  AgentState* find_agent(int id);
};

enum class TaskKind { shuffle, sort, random };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct Scenario {
  Scene start;
  Scene target;
  TaskKind task_kind = TaskKind::random;
  std::uint64_t seed = 0;
};

/// Domain-randomization bounds. Optional fields pin a value instead of sampling it.
struct RandomizationRanges {
  double arena_min = 4.5;
  double arena_max = 5.5;
  int agents_min = 2;
  int agents_max = 3;
  std::vector<int> object_counts{8, 12, 16};
  int obstacles_min = 5;
  int obstacles_max = 14;
  int gray_min = 128;
  int gray_max = 255;

  std::optional<double> arena_size;
  std::optional<int> agents;
  std::optional<int> objects;
  std::optional<int> obstacles;

  /// Throws std::invalid_argument when the ranges are inconsistent.
  void validate() const;
};

/// Free space kept between generated entities so that agents can move between them.
inline constexpr double kGenerationClearance = 0.25;
inline constexpr int kPlacementAttempts = 10000;

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidScene : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic in (task_kind, ranges, seed). Throws GenerationError("arena too crowded")
/// when rejection sampling runs out of attempts.
Scenario generate_scenario(TaskKind task_kind, const RandomizationRanges& ranges,
                           std::uint64_t seed, int patches_per_side = 24);

/// Overlap and containment checks. Throws InvalidScene.
void validate_scene(const Scene& scene);
/// validate_scene on both scenes plus m < n and the (class, radius) multiset match.
void validate_scenario(const Scenario& scenario);

/// Per target slot, which current object (if any) satisfies it.
struct TargetSlot {
  int target_index = 0;
  ObjectClass class_label = ObjectClass::red;
  Vec2 position;
  std::optional<int> claimed_by;        // correct-class object within tolerance
  std::optional<int> physically_taken;  // any object whose footprint overlaps the slot
};

std::vector<TargetSlot> target_slots(const Scene& current, const Scene& target,
                                     double tolerance);

/// Number of objects resting within tolerance of a distinct class-matching target.
int placed_object_count(const Scene& current, const Scene& target, double tolerance);
bool is_placed(const Scene& current, const Scene& target, int object_id, double tolerance);

std::uint64_t scene_hash(const Scene& scene);
std::string hex(std::uint64_t v);

void to_json(nlohmann::json& j, const Obstacle& o);
void from_json(const nlohmann::json& j, Obstacle& o);
void to_json(nlohmann::json& j, const Scene& s);
void from_json(const nlohmann::json& j, Scene& s);
void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace maner
