#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fixtures.hpp"
#include "maner/raster.hpp"

using namespace maner;

namespace {

Scenario random_scenario(std::uint64_t seed, int n = 8, int m = 2) {
  RandomizationRanges r;
  r.objects = n;
  r.agents = m;
  return generate_scenario(TaskKind::random, r, seed);
}

}  // namespace

TEST_CASE("raster config validation") {
  CHECK_NOTHROW(RasterConfig{}.validate());
  CHECK(RasterConfig{}.patches() == 24);
  CHECK_THROWS_AS((RasterConfig{480, 7}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((RasterConfig{0, 20}.validate()), std::invalid_argument);
}

TEST_CASE("blob centroids recover object centers within a pixel") {
  int scenes_ok = 0;
  const RasterConfig cfg;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Scene s = random_scenario(seed, 12, 3).start;
    const RgbImage img = rasterize(s, cfg, seed);
    CHECK(img.width() == 480);
    const auto blobs = extract_object_blobs(img, s.arena_gray);
    const double mpp = cfg.meters_per_pixel(s.arena_size);
    bool ok = blobs.size() == s.objects.size();
    for (const auto& o : s.objects) {
      const Vec2 px{o.position.x / mpp, o.position.y / mpp};
      bool found = false;
      for (const auto& b : blobs)
        if (b.class_label == o.class_label && distance(b.centroid_px, px) <= 1.0) found = true;
      ok = ok && found;
    }
    scenes_ok += ok;
  }
  CHECK(scenes_ok == 25);
}

TEST_CASE("segment is exact") {
  const Scene s = random_scenario(3).start;
  const Segmentation seg = segment(s);
  REQUIRE(seg.objects.size() == s.objects.size());
  REQUIRE(seg.agents.size() == s.agents.size());
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    CHECK(seg.objects[i].id == s.objects[i].id);
    CHECK(seg.objects[i].position.x == s.objects[i].position.x);
    CHECK(seg.objects[i].class_label == s.objects[i].class_label);
  }
}

TEST_CASE("binary occupancy matches analytic footprints") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene s = random_scenario(seed).start;
    const int n = 96;
    const GrayImage occ = occupancy_grid(s, n);
    const double cell = s.arena_size / n;
    int mismatches = 0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const Rect sq{{c * cell, r * cell}, {(c + 1) * cell, (r + 1) * cell}};
        bool hit = false;
        for (const auto& o : s.obstacles) hit = hit || o.distance_to(sq) < 0.0 || o.distance_to(sq) == 0.0;
        for (const auto& o : s.objects) hit = hit || distance(o.position, sq) < o.radius;
        mismatches += (occ.at(c, r) != 0) != hit;
      }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("agent and object maps use the +1/-1 convention") {
  const Scene s = fixture::blocking_instance(0).start;
  const RasterConfig cfg;
  const double mpp = cfg.meters_per_pixel(s.arena_size);
  auto pix = [&](Vec2 p) { return Cell{static_cast<int>(p.x / mpp), static_cast<int>(p.y / mpp)}; };

  const Grid<float> mr = encode_agent_map(s, 1, cfg);
  CHECK(mr[pix(s.agents[1].position)] == 1.0f);
  CHECK(mr[pix(s.agents[0].position)] == -1.0f);
  CHECK(mr.at(0, 0) == 0.0f);

  const Grid<float> mf = encode_object_map(s, {0, 2}, 2, cfg);
  CHECK(mf[pix(s.objects[2].position)] == 1.0f);
  CHECK(mf[pix(s.objects[0].position)] == -1.0f);
  CHECK(mf[pix(s.objects[1].position)] == 0.0f);

  const GrayImage g = signed_map_to_gray(mf);
  CHECK(g[pix(s.objects[2].position)] == 255);
  CHECK(g[pix(s.objects[0].position)] == 0);
  CHECK(g.at(0, 0) == 128);
}

TEST_CASE("segmentation mask channels") {
  const Scene s = fixture::blocking_instance(0).start;
  const RasterConfig cfg;
  const double mpp = cfg.meters_per_pixel(s.arena_size);
  auto pix = [&](Vec2 p) { return Cell{static_cast<int>(p.x / mpp), static_cast<int>(p.y / mpp)}; };
  const RgbImage m = segmentation_mask(s, 1, cfg);
  const Rgb picked = m[pix(s.objects[1].position)];
  const Rgb other = m[pix(s.objects[0].position)];
  const Rgb agent = m[pix(s.agents[0].position)];
  const Rgb free = m[pix({2.5, 4.9})];
  CHECK(picked[0] == 255);
  CHECK(picked[1] == 0);
  CHECK(other[1] == 255);
  CHECK(other[0] == 0);
  CHECK(agent[1] == 255);
  CHECK(free[2] == 255);
  CHECK(free[0] == 0);
}

TEST_CASE("PPM and PGM round trip") {
  const Scene s = random_scenario(1).start;
  const RgbImage img = rasterize(s, {96, 4}, 2);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string ppm = (dir / "maner_raster_test.ppm").string();
  const std::string pgm = (dir / "maner_raster_test.pgm").string();
  write_ppm(img, ppm);
  const RgbImage back = read_ppm(ppm);
  CHECK(back.width() == 96);
  CHECK(back.data() == img.data());
  const GrayImage occ = binary_occupancy(s, {96, 4});
  write_pgm(occ, pgm);
  CHECK(read_pgm(pgm).data() == occ.data());
  std::remove(ppm.c_str());
  std::remove(pgm.c_str());
  CHECK_THROWS(read_ppm((dir / "does_not_exist.ppm").string()));
}

TEST_CASE("transform_scene moves geometry like transform_grid moves patches") {
  const Scene s = random_scenario(4).start;
  const int n = 24;
  const double cell = s.arena_size / n;
  for (GridTransform t : {GridTransform::flip_horizontal, GridTransform::flip_vertical, GridTransform::rotate_cw,
                          GridTransform::rotate_ccw}) {
    const Scene ts = transform_scene(s, t);
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      const Cell c{static_cast<int>(s.objects[i].position.x / cell), static_cast<int>(s.objects[i].position.y / cell)};
      const Cell tc{static_cast<int>(ts.objects[i].position.x / cell),
                    static_cast<int>(ts.objects[i].position.y / cell)};
      CHECK(transform_cell(c, t, n) == tc);
    }
    CHECK_NOTHROW(validate_scene(ts));
  }
}
