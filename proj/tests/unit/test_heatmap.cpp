#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "maner/heatmap.hpp"
#include "maner/raster.hpp"
#include "oracles.hpp"

using namespace maner;

namespace {

Scenario random_scenario(std::uint64_t seed, int n = 8, int m = 2) {
  RandomizationRanges r;
  r.objects = n;
  r.agents = m;
  return generate_scenario(TaskKind::random, r, seed);
}

Cell patch(const Scene& s, Vec2 p, int n = 24) {
  const double cell = s.arena_size / n;
  return {std::clamp(static_cast<int>(p.x / cell), 0, n - 1), std::clamp(static_cast<int>(p.y / cell), 0, n - 1)};
}

bool in_unit(const Heatmap& h) {
  for (double v : h.data())
    if (!(v >= 0.0 && v <= 1.0)) return false;
  return true;
}

}  // namespace

TEST_CASE("pick heatmap: nearest object scores 1, farthest reachable 0") {
  const Scenario sc = random_scenario(2);
  const Scene& s = sc.start;
  const auto d = pick_distances(s, 0, {});
  const Heatmap h = pick_heatmap(s, sc.target, 0);
  CHECK(in_unit(h));
  double dmin = kUnreachable, dmax = 0;
  for (const auto& x : d)
    if (x) {
      dmin = std::min(dmin, *x);
      dmax = std::max(dmax, *x);
    }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    if (!d[i] || is_placed(s, sc.target, s.objects[i].id, 0.1)) continue;
    const double v = h[patch(s, s.objects[i].position)];
    if (*d[i] == dmin) CHECK(v == doctest::Approx(1.0));
    if (*d[i] == dmax) CHECK(v == doctest::Approx(0.0));
  }
  // Only object patches carry values.
  int nonzero = 0;
  for (double v : h.data()) nonzero += v > 0;
  CHECK(nonzero <= static_cast<int>(s.objects.size()));
}

TEST_CASE("pick heatmap distances match the Dijkstra oracle") {
  const Scenario sc = random_scenario(6, 12, 3);
  const Scene& s = sc.start;
  for (const auto& a : s.agents) {
    const auto d = pick_distances(s, a.id, {});
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      Scene rest = s;
      rest.objects.erase(rest.objects.begin() + static_cast<long>(i));
      const PlanningGrid g = agent_grid(rest, a, 24);
      const auto want = oracle::dijkstra_octile(g.traversable, g.cell_of(a.position), g.cell_of(s.objects[i].position));
      REQUIRE(d[i].has_value() == want.has_value());
      if (want) CHECK(*d[i] == doctest::Approx(*want));
    }
  }
}

TEST_CASE("placed objects carry the 0.1 factor") {
  Scenario sc = fixture::blocking_instance(0);
  // Put green on its target; red and blue stay misplaced.
  sc.start.objects[2].position = sc.target.objects[2].position;
  HeatmapConfig cfg;
  cfg.placed_factor = 1.0;
  const Heatmap raw = pick_heatmap(sc.start, sc.target, 1, cfg);
  const Heatmap scaled = pick_heatmap(sc.start, sc.target, 1);
  const Cell g = patch(sc.start, sc.start.objects[2].position);
  const Cell r = patch(sc.start, sc.start.objects[0].position);
  CHECK(scaled[g] == doctest::Approx(0.1 * raw[g]));
  CHECK(scaled[r] == doctest::Approx(raw[r]));
}

TEST_CASE("feasibility is zero exactly where the drop patch is unreachable") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario sc = random_scenario(seed, 12, 2);
    const Scene& s = sc.start;
    const ObjectState& o = s.objects[0];
    const PlanningGrid g = agent_grid(s, s.agents[0], 24, o.id);
    const Cell pickup = g.cell_of(o.position);
    const Heatmap f = feasibility_heatmap(g, pickup, {});
    CHECK(in_unit(f));
    const auto seen = oracle::flood_fill8(g.traversable, pickup);
    for (int r = 0; r < 24; ++r)
      for (int c = 0; c < 24; ++c) {
        const bool ok = seen[r][c] && g.placeable.at(c, r);
        CHECK((f.at(c, r) > 0.0) == ok);
      }
  }
}

TEST_CASE("feasibility: other pickups are reserved, density halves") {
  Scene s;
  s.arena_size = 4.8;
  s.agents = {{0, {0.5, 0.5}, 0, 0.2}};
  s.objects = {{0, ObjectClass::red, {2.5, 2.5}, 0.1}};
  const PlanningGrid g = agent_grid(s, s.agents[0], 24, 0);
  const Cell pickup = g.cell_of(s.objects[0].position);
  const Cell other{5, 5};
  const Heatmap f = feasibility_heatmap(g, pickup, {other});
  CHECK(f[other] == 0.0);
  CHECK(f[{5, 6}] > 0.0);
  // Farthest-to-nearest normalization: the pickup patch itself scores highest.
  double best = 0;
  for (double v : f.data()) best = std::max(best, v);
  CHECK(f[pickup] == doctest::Approx(best));

  Grid<std::uint8_t> occ(24, 24, 0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 4; ++c) occ.at(c, r) = 1;
  CHECK(neighborhood_density(occ, {2, 2}, 5) == doctest::Approx(20.0 / 25.0));
  CHECK(neighborhood_density(occ, {0, 0}, 5) == doctest::Approx(1.0));
  CHECK(neighborhood_density(occ, {20, 20}, 5) == 0.0);
}

TEST_CASE("quality heatmap closed form") {
  Scenario sc = fixture::blocking_instance(0);
  // Green's only target: the patch holding it scores 1 - d/diag with d from the patch center.
  const Heatmap q = quality_heatmap(sc.start, sc.target, 2);
  CHECK(in_unit(q));
  const double cell = sc.start.arena_size / 24;
  const double diag = sc.start.arena_size * std::sqrt(2.0);
  const Vec2 t = sc.target.objects[2].position;
  for (Cell c : {Cell{0, 0}, Cell{23, 23}, Cell{23, 0}, patch(sc.start, t)}) {
    const Vec2 ctr{(c.col + 0.5) * cell, (c.row + 0.5) * cell};
    CHECK(q[c] == doctest::Approx(1.0 - distance(ctr, t) / diag));
  }
}

TEST_CASE("quality measures to the unoccupied target") {
  Scene start;
  start.arena_size = 5.0;
  start.objects = {{0, ObjectClass::red, {1.0, 1.0}, 0.1}, {1, ObjectClass::red, {4.0, 4.0}, 0.1}};
  start.agents = {{0, {2.5, 0.5}, 0, 0.2}};
  Scene target = start;
  target.agents.clear();
  target.objects[0].position = {4.0, 4.0};  // object 1 already sits here
  target.objects[1].position = {1.0, 4.0};
  const auto qt = quality_targets(start, target, 0, 0.1);
  REQUIRE(qt.size() == 1);
  CHECK(qt[0].x == 1.0);
  CHECK(qt[0].y == 4.0);
  Scene no_class = target;
  for (auto& o : no_class.objects) o.class_label = ObjectClass::blue;
  CHECK_THROWS_WITH_AS(quality_heatmap(start, no_class, 0), "no target for class", std::invalid_argument);
}

TEST_CASE("fuse is the weighted sum") {
  Heatmap f(24, 24, 0.5), q(24, 24, 1.0);
  const Heatmap p = fuse(f, q);
  CHECK(p.at(3, 3) == doctest::Approx(0.9));
  const Heatmap ones = fuse(Heatmap(24, 24, 1.0), Heatmap(24, 24, 1.0));
  CHECK(ones.at(0, 0) == doctest::Approx(1.0));
  const Heatmap zero = fuse(Heatmap(24, 24, 0.0), q);
  CHECK(zero.at(7, 1) == doctest::Approx(0.8));
  CHECK_THROWS_AS(fuse(Heatmap(24, 24), Heatmap(12, 12)), std::invalid_argument);
  CHECK_THROWS_AS((FusionWeights{0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FusionWeights{0.5, 1.0}.validate()), std::invalid_argument);
}

TEST_CASE("assign_picks: greedy by confidence, unique on both sides") {
  Scene s;
  s.arena_size = 4.8;
  s.objects = {{0, ObjectClass::red, {0.5, 0.5}, 0.1}, {1, ObjectClass::red, {2.5, 2.5}, 0.1}};
  Heatmap a(24, 24, 0.0), b(24, 24, 0.0);
  a[patch(s, s.objects[0].position)] = 0.9;
  a[patch(s, s.objects[1].position)] = 0.8;
  b[patch(s, s.objects[0].position)] = 1.0;
  b[patch(s, s.objects[1].position)] = 0.2;
  const auto picks = assign_picks({{0, a}, {1, b}}, s.objects, s.arena_size);
  REQUIRE(picks.size() == 2);
  CHECK(picks[0].agent_id == 1);
  CHECK(picks[0].object_id == 0);
  CHECK(picks[1].agent_id == 0);
  CHECK(picks[1].object_id == 1);
  const auto none = assign_picks({{0, Heatmap(24, 24, 0.0)}}, s.objects, s.arena_size);
  CHECK(none.empty());
}

TEST_CASE("heatmap export: inverted PGM and JSON round trip") {
  Heatmap h(24, 24, 0.0);
  h.at(1, 2) = 1.0;
  h.at(3, 4) = 0.25;
  const GrayImage g = heatmap_to_gray(h);
  CHECK(g.at(1, 2) == 0);
  CHECK(g.at(0, 0) == 255);
  const Heatmap back = heatmap_from_json(heatmap_to_json(h));
  CHECK(back == h);
  const auto path = (std::filesystem::temp_directory_path() / "maner_heat.pgm").string();
  write_heatmap_pgm(h, path);
  CHECK(read_pgm(path) == g);
  std::filesystem::remove(path);
}
