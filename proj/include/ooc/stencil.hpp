#pragma once

#include <utility>
#include <vector>

#include "ooc/errors.hpp"
#include "ooc/extent.hpp"

namespace ooc {

/// A fixed set of relative index offsets used to access a dataset from each
/// iteration point.
struct Stencil {
  std::vector<Point> offsets;

  static Stencil point() { return Stencil{{Point{0, 0, 0}}}; }
  static Stencil of(std::vector<Point> offs) { return Stencil{std::move(offs)}; }
  /// 1-D line along `dim`: offsets -radius..+radius.
  static Stencil line(int dim, index_t radius) {
    Stencil s;
    for (index_t o = -radius; o <= radius; ++o) {
      Point p{0, 0, 0};
      p[dim] = o;
      s.offsets.push_back(p);
    }
    return s;
  }
  /// Star stencil: centre plus -radius..+radius along each of the first
  /// `ndim` dimensions (5-point for ndim=2, radius=1).
  static Stencil star(int ndim, index_t radius) {
    Stencil s;
    s.offsets.push_back(Point{0, 0, 0});
    for (int d = 0; d < ndim; ++d)
      for (index_t o = -radius; o <= radius; ++o) {
        if (o == 0) continue;
        Point p{0, 0, 0};
        p[d] = o;
        s.offsets.push_back(p);
      }
    return s;
  }

  bool is_point() const {
    return offsets.size() == 1 && offsets[0] == Point{0, 0, 0};
  }

  bool has_offset(const Point& off) const {
    for (const auto& o : offsets)
      if (o == off) return true;
    return false;
  }
};

/// Per-dimension minimum and maximum of the offsets.
inline std::pair<Point, Point> stencil_extents(const Stencil& s) {
  if (s.offsets.empty()) throw ValidationError("stencil has no offsets");
  Point lo = s.offsets[0], hi = s.offsets[0];
  for (const auto& o : s.offsets)
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], o[d]);
      hi[d] = std::max(hi[d], o[d]);
    }
  return {lo, hi};
}

}  // namespace ooc
