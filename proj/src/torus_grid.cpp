#include "freqcache/torus_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace freqcache {

TorusGrid::TorusGrid(double side, std::span<const Point> points, double points_per_cell)
    : side_(side), points_(points) {
  if (!(side > 0.0)) throw std::invalid_argument("TorusGrid: side must be positive");
  const double want = std::sqrt(std::max(1.0, points.size() / std::max(points_per_cell, 1e-9)));
  cells_ = std::clamp(static_cast<int>(want), 1, 4096);
  cell_size_ = side_ / cells_;

  const std::size_t n_cells = static_cast<std::size_t>(cells_) * cells_;
  cell_start_.assign(n_cells + 1, 0);
  std::vector<int> cell_of(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = cell_coord(points[i].y) * cells_ + cell_coord(points[i].x);
    cell_of[i] = c;
    ++cell_start_[c + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.resize(points.size());
  std::vector<int> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) cell_items_[cursor[cell_of[i]]++] = static_cast<int>(i);
}

}  // namespace freqcache
