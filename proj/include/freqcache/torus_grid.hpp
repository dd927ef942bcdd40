#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace freqcache {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Squared minimum-image distance on the square torus of the given side.
inline double torus_dist2(Point a, Point b, double side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, side - dx);
  dy = std::min(dy, side - dy);
  return dx * dx + dy * dy;
}

/// Uniform bucket grid over [0, side)^2 with periodic boundaries. Queries walk
/// square rings of cells outward from the query cell and stop once no unvisited
/// cell can hold anything closer than the best hit.
class TorusGrid {
 public:
  TorusGrid(double side, std::span<const Point> points, double points_per_cell = 2.0);

  struct Hit {
    int index = -1;  ///< -1 when no point passes the filter
    double dist2 = 0.0;
  };

  /// Nearest point accepted by `accept(index)`; equal distances resolve to
  /// the lowest index.
  template <class Accept>
  Hit nearest(Point p, Accept&& accept) const;

  Hit nearest(Point p) const {
    return nearest(p, [](int) { return true; });
  }

  double side() const { return side_; }

 private:
  int cell_coord(double v) const {
    int c = static_cast<int>(v / cell_size_);
    return c >= cells_ ? cells_ - 1 : (c < 0 ? 0 : c);
  }
  int wrap(int c) const { return ((c % cells_) + cells_) % cells_; }

  template <class Accept>
  void scan_cell(int cx, int cy, Point p, Accept& accept, Hit& best) const;

  double side_;
  int cells_;
  double cell_size_;
  std::span<const Point> points_;
  std::vector<int> cell_start_;  ///< CSR offsets, cells_^2 + 1 entries
  std::vector<int> cell_items_;
};

template <class Accept>
void TorusGrid::scan_cell(int cx, int cy, Point p, Accept& accept, Hit& best) const {
  const int cell = cy * cells_ + cx;
  for (int k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) {
    const int i = cell_items_[k];
    const double d2 = torus_dist2(p, points_[i], side_);
    if (best.index >= 0 && (d2 > best.dist2 || (d2 == best.dist2 && i > best.index))) continue;
    if (!accept(i)) continue;
    best = {i, d2};
  }
}

template <class Accept>
TorusGrid::Hit TorusGrid::nearest(Point p, Accept&& accept) const {
  Hit best;
  if (points_.empty()) return best;
  const int cx = cell_coord(p.x);
  const int cy = cell_coord(p.y);
  for (int r = 0;; ++r) {
    if (2 * r + 1 > cells_) {
      // The ring wraps onto itself: finish with a full scan.
      for (int y = 0; y < cells_; ++y)
        for (int x = 0; x < cells_; ++x) scan_cell(x, y, p, accept, best);
      return best;
    }
    if (r == 0) {
      scan_cell(cx, cy, p, accept, best);
    } else {
      for (int d = -r; d <= r; ++d) {
        scan_cell(wrap(cx + d), wrap(cy - r), p, accept, best);
        scan_cell(wrap(cx + d), wrap(cy + r), p, accept, best);
      }
      for (int d = -r + 1; d <= r - 1; ++d) {
        scan_cell(wrap(cx - r), wrap(cy + d), p, accept, best);
        scan_cell(wrap(cx + r), wrap(cy + d), p, accept, best);
      }
    }
    // Cells beyond ring r are at least r cell widths away.
    const double reach = r * cell_size_;
    if (best.index >= 0 && best.dist2 < reach * reach) return best;
  }
}

}  // namespace freqcache
