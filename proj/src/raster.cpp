#include "maner/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace maner {

void RasterConfig::validate() const {
  if (image_size <= 0 || patch_size <= 0)
    throw std::invalid_argument("image and patch sizes must be positive");
  if (image_size % patch_size != 0)
    throw std::invalid_argument("image_size must be divisible by patch_size");
}

Rgb class_color(ObjectClass c) {
  switch (c) {
    case ObjectClass::red: return {220, 40, 40};
    case ObjectClass::green: return {40, 180, 40};
    case ObjectClass::blue: return {40, 40, 220};
  }
  return {220, 40, 40};
}

namespace {

// Pixel index range [lo, hi] whose centers may fall inside [a, b] (world meters).
std::pair<int, int> pixel_span(double a, double b, double mpp, int n) {
  const int lo = std::max(0, static_cast<int>(std::floor(a / mpp - 0.5)));
  const int hi = std::min(n - 1, static_cast<int>(std::ceil(b / mpp - 0.5)));
  return {lo, hi};
}

template <typename T, typename F>
void paint_disc(Grid<T>& img, double mpp, Vec2 center, double radius, F&& paint) {
  const int n = img.width();
  const auto [x0, x1] = pixel_span(center.x - radius, center.x + radius, mpp, n);
  const auto [y0, y1] = pixel_span(center.y - radius, center.y + radius, mpp, n);
  for (int py = y0; py <= y1; ++py)
    for (int px = x0; px <= x1; ++px) {
      const Vec2 pc{(px + 0.5) * mpp, (py + 0.5) * mpp};
      if (distance(pc, center) <= radius) paint(img.at(px, py));
    }
}

template <typename T, typename F>
void paint_obstacle(Grid<T>& img, double mpp, const Obstacle& o, F&& paint) {
  if (o.shape == Obstacle::Shape::disc) {
    paint_disc(img, mpp, o.center, o.radius, paint);
    return;
  }
  const int n = img.width();
  const Rect b = o.bounds();
  const auto [x0, x1] = pixel_span(b.min.x, b.max.x, mpp, n);
  const auto [y0, y1] = pixel_span(b.min.y, b.max.y, mpp, n);
  for (int py = y0; py <= y1; ++py)
    for (int px = x0; px <= x1; ++px)
      if (contains(b, {(px + 0.5) * mpp, (py + 0.5) * mpp})) paint(img.at(px, py));
}

std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

RgbImage rasterize(const Scene& scene, const RasterConfig& config, std::uint64_t noise_seed) {
  config.validate();
  const auto g = static_cast<std::uint8_t>(scene.arena_gray);
  RgbImage img(config.image_size, config.image_size, Rgb{g, g, g});
  const double mpp = config.meters_per_pixel(scene.arena_size);
  for (const auto& o : scene.obstacles)
    paint_obstacle(img, mpp, o, [](Rgb& p) { p = kObstacleColor; });
  for (const auto& a : scene.agents)
    paint_disc(img, mpp, a.position, a.radius, [](Rgb& p) { p = kAgentColor; });
  for (const auto& o : scene.objects) {
    std::mt19937_64 rng(noise_seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(o.id) + 1);
    std::normal_distribution<double> noise(0.0, kColorNoiseSigma);
    const Rgb base = class_color(o.class_label);
    Rgb color{};
    for (int ch = 0; ch < 3; ++ch) color[static_cast<std::size_t>(ch)] = clamp_byte(base[static_cast<std::size_t>(ch)] + noise(rng));
    paint_disc(img, mpp, o.position, o.radius, [&](Rgb& p) { p = color; });
  }
  return img;
}

GrayImage occupancy_grid(const Scene& scene, int cells_per_side) {
  GrayImage grid(cells_per_side, cells_per_side, 0);
  const double cell = scene.arena_size / cells_per_side;
  auto span = [&](double a, double b) {
    const int lo = std::max(0, static_cast<int>(std::floor(a / cell)));
    const int hi = std::min(cells_per_side - 1, static_cast<int>(std::floor(b / cell)));
    return std::pair{lo, hi};
  };
  auto square = [&](int c, int r) {
    return Rect{{c * cell, r * cell}, {(c + 1) * cell, (r + 1) * cell}};
  };
  for (const auto& o : scene.obstacles) {
    const Rect b = o.bounds();
    const auto [c0, c1] = span(b.min.x, b.max.x);
    const auto [r0, r1] = span(b.min.y, b.max.y);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const Rect sq = square(c, r);
        bool hit = false;
        if (o.shape == Obstacle::Shape::disc) {
          hit = distance(o.center, sq) < o.radius;
        } else {
          hit = b.min.x < sq.max.x && b.max.x > sq.min.x && b.min.y < sq.max.y && b.max.y > sq.min.y;
        }
        if (hit) grid.at(c, r) = 1;
      }
  }
  for (const auto& o : scene.objects) {
    const auto [c0, c1] = span(o.position.x - o.radius, o.position.x + o.radius);
    const auto [r0, r1] = span(o.position.y - o.radius, o.position.y + o.radius);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        if (distance(o.position, square(c, r)) < o.radius) grid.at(c, r) = 1;
  }
  return grid;
}

GrayImage binary_occupancy(const Scene& scene, const RasterConfig& config) {
  config.validate();
  return occupancy_grid(scene, config.image_size);
}

Segmentation segment(const Scene& scene) { return {scene.objects, scene.agents}; }

std::vector<Blob> extract_object_blobs(const RgbImage& image, int arena_gray) {
  const int w = image.width();
  const int h = image.height();
  auto dist2 = [](const Rgb& a, const Rgb& b) {
    int s = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
      s += d * d;
    }
    return s;
  };
  const auto g = static_cast<std::uint8_t>(arena_gray);
  const Rgb background{g, g, g};
  constexpr int kMatch = 60 * 60;
  Grid<int> label(w, h, -1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Rgb& p = image.at(x, y);
      if (p == kAgentColor || p == kObstacleColor || p == background) continue;
      int best = -1;
      int best_d = kMatch;
      for (int c = 0; c < kClassCount; ++c) {
        const int d = dist2(p, class_color(static_cast<ObjectClass>(c)));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      label.at(x, y) = best;
    }

  std::vector<Blob> blobs;
  Grid<char> seen(w, h, 0);
  std::vector<Cell> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (seen.at(x, y) || label.at(x, y) < 0) continue;
      const int cls = label.at(x, y);
      double sx = 0, sy = 0;
      int count = 0;
      stack.push_back({x, y});
      seen.at(x, y) = 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        sx += c.col + 0.5;
        sy += c.row + 0.5;
        ++count;
        const Cell nbrs[4] = {{c.col + 1, c.row}, {c.col - 1, c.row}, {c.col, c.row + 1}, {c.col, c.row - 1}};
        for (const Cell& nb : nbrs) {
          if (!label.in_bounds(nb) || seen[nb] || label[nb] != cls) continue;
          seen[nb] = 1;
          stack.push_back(nb);
        }
      }
      blobs.push_back({static_cast<ObjectClass>(cls), {sx / count, sy / count}, count});
    }
  return blobs;
}

Grid<float> encode_agent_map(const Scene& scene, int agent_id, const RasterConfig& config) {
  config.validate();
  Grid<float> map(config.image_size, config.image_size, 0.0f);
  const double mpp = config.meters_per_pixel(scene.arena_size);
  for (const auto& a : scene.agents) {
    const float v = a.id == agent_id ? 1.0f : -1.0f;
    paint_disc(map, mpp, a.position, a.radius, [v](float& p) { p = v; });
  }
  return map;
}

Grid<float> encode_object_map(const Scene& scene, const std::vector<int>& picked_objects,
                              int current_object, const RasterConfig& config) {
  config.validate();
  Grid<float> map(config.image_size, config.image_size, 0.0f);
  const double mpp = config.meters_per_pixel(scene.arena_size);
  for (int id : picked_objects) {
    if (id == current_object) continue;
    if (const ObjectState* o = scene.find_object(id))
      paint_disc(map, mpp, o->position, o->radius, [](float& p) { p = -1.0f; });
  }
  if (const ObjectState* o = scene.find_object(current_object))
    paint_disc(map, mpp, o->position, o->radius, [](float& p) { p = 1.0f; });
  return map;
}

RgbImage segmentation_mask(const Scene& scene, int picked_object, const RasterConfig& config) {
  config.validate();
  RgbImage mask(config.image_size, config.image_size, Rgb{0, 0, 255});
  const double mpp = config.meters_per_pixel(scene.arena_size);
  auto other = [](Rgb& p) { p = {0, 255, 0}; };
  for (const auto& o : scene.obstacles) paint_obstacle(mask, mpp, o, other);
  for (const auto& a : scene.agents) paint_disc(mask, mpp, a.position, a.radius, other);
  for (const auto& o : scene.objects) {
    if (o.id == picked_object)
      paint_disc(mask, mpp, o.position, o.radius, [](Rgb& p) { p = {255, 0, 0}; });
    else
      paint_disc(mask, mpp, o.position, o.radius, other);
  }
  return mask;
}

void write_ppm(const RgbImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (const Rgb& p : image.data()) out.write(reinterpret_cast<const char*>(p.data()), 3);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_pgm(const GrayImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data().data()),
            static_cast<std::streamsize>(image.data().size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::ifstream open_netpbm(const std::string& path, const char* magic, int& w, int& h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path);
  std::string m;
  int maxval = 0;
  in >> m >> w >> h >> maxval;
  if (m != magic || maxval != 255 || w <= 0 || h <= 0)
    throw std::runtime_error("unsupported image format: " + path);
  in.get();
  return in;
}

}  // namespace

RgbImage read_ppm(const std::string& path) {
  int w = 0, h = 0;
  auto in = open_netpbm(path, "P6", w, h);
  RgbImage img(w, h);
  for (Rgb& p : img.data()) in.read(reinterpret_cast<char*>(p.data()), 3);
  if (!in) throw std::runtime_error("truncated image: " + path);
  return img;
}

GrayImage read_pgm(const std::string& path) {
  int w = 0, h = 0;
  auto in = open_netpbm(path, "P5", w, h);
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
  if (!in) throw std::runtime_error("truncated image: " + path);
  return img;
}

GrayImage signed_map_to_gray(const Grid<float>& map) {
  GrayImage out(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i)
    out.data()[i] = clamp_byte((static_cast<double>(map.data()[i]) + 1.0) * 127.5);
  return out;
}

Scene transform_scene(const Scene& scene, GridTransform t) {
  const double L = scene.arena_size;
  auto point = [&](Vec2 p) -> Vec2 {
    switch (t) {
      case GridTransform::identity: return p;
      case GridTransform::flip_horizontal: return {L - p.x, p.y};
      case GridTransform::flip_vertical: return {p.x, L - p.y};
      case GridTransform::rotate_cw: return {L - p.y, p.x};
      case GridTransform::rotate_ccw: return {p.y, L - p.x};
    }
    return p;
  };
  auto heading = [&](double h) {
    switch (t) {
      case GridTransform::identity: return h;
      case GridTransform::flip_horizontal: return wrap_angle(kPi - h);
      case GridTransform::flip_vertical: return wrap_angle(-h);
      case GridTransform::rotate_cw: return wrap_angle(h + kPi / 2);
      case GridTransform::rotate_ccw: return wrap_angle(h - kPi / 2);
    }
    return h;
  };
  const bool swaps = t == GridTransform::rotate_cw || t == GridTransform::rotate_ccw;
  Scene out = scene;
  for (auto& o : out.objects) o.position = point(o.position);
  for (auto& a : out.agents) {
    a.position = point(a.position);
    a.heading = heading(a.heading);
  }
  for (auto& o : out.obstacles) {
    o.center = point(o.center);
    if (swaps) std::swap(o.half_extent.x, o.half_extent.y);
  }
  return out;
}

}  // namespace maner
