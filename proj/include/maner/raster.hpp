#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "maner/grid.hpp"
#include "maner/world.hpp"

namespace maner {

struct RasterConfig {
  int image_size = 480;
  int patch_size = 20;

  /// Throws std::invalid_argument unless image_size is a positive multiple of patch_size.
  void validate() const;
  int patches() const { return image_size / patch_size; }
  double meters_per_pixel(double arena_size) const { return arena_size / image_size; }
  double patch_meters(double arena_size) const { return arena_size / patches(); }
};

using Rgb = std::array<std::uint8_t, 3>;
using RgbImage = Grid<Rgb>;
using GrayImage = Grid<std::uint8_t>;

/// Reserved colors. Objects are drawn from the class palette plus per-object noise.
inline constexpr Rgb kAgentColor{255, 255, 0};
inline constexpr Rgb kObstacleColor{0, 0, 0};
Rgb class_color(ObjectClass c);
inline constexpr double kColorNoiseSigma = 10.0;

/// Bird's-eye image. Pixel (px, py) covers world x in [px, px+1) * mpp and y likewise;
/// a pixel belongs to a shape when its center does.
RgbImage rasterize(const Scene& scene, const RasterConfig& config, std::uint64_t noise_seed = 0);

/// 1 where the pixel square intersects an obstacle or object footprint, 0 elsewhere.
GrayImage binary_occupancy(const Scene& scene, const RasterConfig& config);

/// Occupancy at arbitrary resolution (cells_per_side x cells_per_side).
GrayImage occupancy_grid(const Scene& scene, int cells_per_side);

struct Segmentation {
  std::vector<ObjectState> objects;
  std::vector<AgentState> agents;
};

/// Ground-truth segmentation; simulation replaces the learned segmenter.
Segmentation segment(const Scene& scene);

struct Blob {
  ObjectClass class_label = ObjectClass::red;
  Vec2 centroid_px;  // continuous pixel coordinates (pixel centers at +0.5)
  int pixel_count = 0;
};

/// Connected components of object-colored pixels, classified by nearest palette color.
std::vector<Blob> extract_object_blobs(const RgbImage& image, int arena_gray);

/// Agent map: +1 on the queried agent's footprint, -1 on other agents, 0 elsewhere.
Grid<float> encode_agent_map(const Scene& scene, int agent_id, const RasterConfig& config);

/// Object map: +1 on the current object, -1 on the other picked objects, 0 elsewhere.
Grid<float> encode_object_map(const Scene& scene, const std::vector<int>& picked_objects,
                              int current_object, const RasterConfig& config);

/// Channel 0: picked object pixels, channel 1: all other content, channel 2: free space.
RgbImage segmentation_mask(const Scene& scene, int picked_object, const RasterConfig& config);

void write_ppm(const RgbImage& image, const std::string& path);
void write_pgm(const GrayImage& image, const std::string& path);
RgbImage read_ppm(const std::string& path);
GrayImage read_pgm(const std::string& path);

/// Maps a signed map in [-1, 1] to 8-bit (-1 -> 0, 0 -> 128, +1 -> 255).
GrayImage signed_map_to_gray(const Grid<float>& map);

/// World-space counterpart of transform_grid: maps scene geometry so that its raster
/// equals the transformed raster of the original.
Scene transform_scene(const Scene& scene, GridTransform t);

}  // namespace maner
