#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace maner {

/// Column/row index into a square grid. Row grows with world y.
struct Cell {
  int col = 0;
  int row = 0;

  friend bool operator==(Cell a, Cell b) = default;
  friend bool operator<(Cell a, Cell b) { return a.row != b.row ? a.row < b.row : a.col < b.col; }
};

/// Row-major dense 2D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width < 0 || height < 0) throw std::invalid_argument("negative grid size");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }
  bool in_bounds(Cell c) const { return in_bounds(c.col, c.row); }

  T& at(int col, int row) { return cells_[index(col, row)]; }
  const T& at(int col, int row) const { return cells_[index(col, row)]; }
  T& operator[](Cell c) { return at(c.col, c.row); }
  const T& operator[](Cell c) const { return at(c.col, c.row); }

  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  std::vector<T>& data() { return cells_; }
  const std::vector<T>& data() const { return cells_; }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> cells_;
};

/// Geometric transforms of square grids used by the dataset augmentations.
enum class GridTransform { identity, flip_horizontal, flip_vertical, rotate_cw, rotate_ccw };

/// Destination cell of `c` under `t` for a square grid of side `n`.
inline Cell transform_cell(Cell c, GridTransform t, int n) {
  switch (t) {
    case GridTransform::identity: return c;
    case GridTransform::flip_horizontal: return {n - 1 - c.col, c.row};
    case GridTransform::flip_vertical: return {c.col, n - 1 - c.row};
    // With rows drawn top-down, clockwise maps (col,row) -> (n-1-row, col).
    case GridTransform::rotate_cw: return {n - 1 - c.row, c.col};
    case GridTransform::rotate_ccw: return {c.row, n - 1 - c.col};
  }
  return c;
}

template <typename T>
Grid<T> transform_grid(const Grid<T>& g, GridTransform t) {
  if (g.width() != g.height()) throw std::invalid_argument("transform_grid needs a square grid");
  const int n = g.width();
  Grid<T> out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out[transform_cell({c, r}, t, n)] = g.at(c, r);
  return out;
}

}  // namespace maner
