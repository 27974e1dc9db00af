#pragma once

// Hand-built scenarios shared by the unit and acceptance tests.

#include <random>

#include "maner/world.hpp"

namespace fixture {

/// Three objects where the red and blue objects sit on each other's targets, so one of
/// them has to be parked somewhere else first. `seed` jitters every position by up to
/// 0.1 m and is stored as the scenario seed.
inline maner::Scenario blocking_instance(std::uint64_t seed) {
  using namespace maner;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> j(-0.1, 0.1);
  auto at = [&](double x, double y) { return Vec2{x + j(rng), y + j(rng)}; };
  Scenario sc;
  sc.seed = seed;
  sc.task_kind = TaskKind::shuffle;
  Scene s;
  s.arena_size = 5.0;
  s.arena_gray = 200;
  const Vec2 red = at(1.2, 1.2), blue = at(3.8, 3.8), green = at(3.8, 1.2);
  s.objects = {{0, ObjectClass::red, red, 0.1}, {1, ObjectClass::blue, blue, 0.1}, {2, ObjectClass::green, green, 0.1}};
  s.agents = {{0, at(0.6, 4.4), 0.0, 0.2}, {1, at(2.5, 2.5), 0.0, 0.2}};
  s.obstacles = {Obstacle::make_rect(at(1.2, 3.6), {0.3, 0.3})};
  sc.start = s;
  sc.target = s;
  sc.target.objects[0].position = blue;
  sc.target.objects[1].position = red;
  sc.target.objects[2].position = at(1.2, 2.4);
  sc.target.agents.clear();
  return sc;
}

}  // namespace fixture
