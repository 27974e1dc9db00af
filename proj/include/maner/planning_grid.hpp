#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "maner/geometry.hpp"
#include "maner/grid.hpp"
#include "maner/world.hpp"

namespace maner {

/// Patch-resolution grid an agent plans on.
///
/// A cell is traversable when the agent's center may be anywhere inside its square:
/// the square keeps one agent radius from walls and static obstacles, and the cell
/// center keeps agent+object radius from every movable object that is not ignored or
/// passable. Motion between two traversable 8-neighbours stays inside their squares,
/// so straight moves never touch static obstacles.
struct PlanningGrid {
  int side = 0;
  double arena_size = 0.0;
  double cell_size = 0.0;
  Grid<std::uint8_t> traversable;
  /// Traversable and clear of every object except the carried one; a drop is valid here.
  Grid<std::uint8_t> placeable;
  /// Raw footprint occupancy of obstacles and objects (carried object excluded).
  Grid<std::uint8_t> occupied;

  Vec2 center(Cell c) const { return {(c.col + 0.5) * cell_size, (c.row + 0.5) * cell_size}; }
  Cell cell_of(Vec2 p) const;
  Rect square(Cell c) const {
    return {{c.col * cell_size, c.row * cell_size}, {(c.col + 1) * cell_size, (c.row + 1) * cell_size}};
  }
  bool in_bounds(Cell c) const { return traversable.in_bounds(c); }
  bool free(Cell c) const { return in_bounds(c) && traversable[c] != 0; }
};

/// Clearance slack for static inflation so that cells whose edge sits exactly one agent
/// radius from a wall are not lost to rounding.
inline constexpr double kGeometryEps = 1e-9;

struct GridOptions {
  double agent_radius = 0.2;
  /// Objects removed from the grid entirely (the carried object).
  std::vector<int> ignored_objects;
  /// Objects the agent may drive over but not drop onto (the one it is parked on).
  std::vector<int> passable_objects;
};

PlanningGrid build_planning_grid(const Scene& scene, int side, const GridOptions& options);

/// Static-only grid: walls and obstacles, no movable objects.
PlanningGrid build_static_grid(const Scene& scene, int side, double agent_radius);

/// Objects whose footprint overlaps a disc of `radius` at `position`.
std::vector<int> objects_under(const Scene& scene, Vec2 position, double radius);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Octile path length kept as exact integer move counts so that equal-length paths
/// found in different expansion orders produce bit-identical doubles.
struct OctileLength {
  int straight = 0;
  int diagonal = 0;
  double value() const { return straight + diagonal * kSqrt2; }
};

double octile_heuristic(Cell a, Cell b);

/// 8-connected A* with octile costs (unit straight, sqrt(2) diagonal) over cells
/// where passable != 0. Distances are in cells.
std::optional<double> astar_distance(const Grid<std::uint8_t>& passable, Cell from, Cell to);
std::optional<std::vector<Cell>> astar_path(const Grid<std::uint8_t>& passable, Cell from, Cell to);

/// Single-source octile distances to every cell; kUnreachable where no path exists.
Grid<double> distance_field(const Grid<std::uint8_t>& passable, Cell from);

/// Cells touched by segment [a,b] (inclusive of corner touches), in grid units.
std::vector<Cell> supercover(const PlanningGrid& grid, Vec2 a, Vec2 b);
bool line_of_sight(const PlanningGrid& grid, Vec2 a, Vec2 b);

}  // namespace maner
