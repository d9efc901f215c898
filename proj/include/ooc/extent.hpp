#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace ooc {

using index_t = std::int64_t;

/// Index vector; unused trailing dimensions are zero.
using Point = std::array<index_t, 3>;

/// Half-open box [lo, hi) of rank 1..3. Unused dimensions are kept as
/// [0, 1) so index arithmetic can always run over three components.
struct Extent {
  int ndim = 1;
  Point lo{0, 0, 0};
  Point hi{1, 1, 1};

  static Extent make(int ndim, Point lo, Point hi) {
    Extent e;
    e.ndim = ndim;
    e.lo = lo;
    e.hi = hi;
    for (int d = ndim; d < 3; ++d) {
      e.lo[d] = 0;
      e.hi[d] = 1;
    }
    return e;
  }
  static Extent line(index_t l, index_t h) { return make(1, {l, 0, 0}, {h, 1, 1}); }
  static Extent rect(index_t l0, index_t h0, index_t l1, index_t h1) {
    return make(2, {l0, l1, 0}, {h0, h1, 1});
  }
  static Extent box(index_t l0, index_t h0, index_t l1, index_t h1, index_t l2, index_t h2) {
    return make(3, {l0, l1, l2}, {h0, h1, h2});
  }
  /// Canonical empty box of the given rank.
  static Extent none(int ndim) { return make(ndim, {0, 0, 0}, {0, 0, 0}); }

  bool empty() const {
    for (int d = 0; d < ndim; ++d)
      if (lo[d] >= hi[d]) return true;
    return false;
  }

  index_t len(int d) const { return hi[d] - lo[d]; }

  index_t size() const {
    if (empty()) return 0;
    index_t n = 1;
    for (int d = 0; d < 3; ++d) n *= hi[d] - lo[d];
    return n;
  }

  bool contains(const Point& p) const {
    for (int d = 0; d < 3; ++d)
      if (p[d] < lo[d] || p[d] >= hi[d]) return false;
    return true;
  }

  bool contains(const Extent& other) const {
    if (other.empty()) return true;
    for (int d = 0; d < 3; ++d)
      if (other.lo[d] < lo[d] || other.hi[d] > hi[d]) return false;
    return true;
  }

  Extent intersect(const Extent& other) const {
    Extent r = *this;
    for (int d = 0; d < 3; ++d) {
      r.lo[d] = std::max(lo[d], other.lo[d]);
      r.hi[d] = std::min(hi[d], other.hi[d]);
    }
    for (int d = 0; d < r.ndim; ++d)
      if (r.lo[d] >= r.hi[d]) return none(r.ndim);
    return r;
  }

  /// Smallest box containing both (empty operands are ignored).
  Extent hull(const Extent& other) const {
    if (empty()) return other;
    if (other.empty()) return *this;
    Extent r = *this;
    for (int d = 0; d < 3; ++d) {
      r.lo[d] = std::min(lo[d], other.lo[d]);
      r.hi[d] = std::max(hi[d], other.hi[d]);
    }
    return r;
  }

  /// Grow by per-dimension offsets: lo += lo_off, hi += hi_off.
  Extent expand(const Point& lo_off, const Point& hi_off) const {
    Extent r = *this;
    for (int d = 0; d < ndim; ++d) {
      r.lo[d] += lo_off[d];
      r.hi[d] += hi_off[d];
    }
    return r;
  }

  /// Replace the range of one dimension.
  Extent with_dim(int d, index_t l, index_t h) const {
    Extent r = *this;
    r.lo[d] = l;
    r.hi[d] = h;
    return r;
  }

  bool operator==(const Extent& other) const {
    return ndim == other.ndim && lo == other.lo && hi == other.hi;
  }

  /// Row-major flat index of p relative to this box (last dim contiguous).
  index_t flatten(const Point& p) const {
    index_t idx = 0;
    for (int d = 0; d < 3; ++d) idx = idx * (hi[d] - lo[d]) + (p[d] - lo[d]);
    return idx;
  }

  /// Row-major strides of this box.
  Point strides() const {
    Point s;
    s[2] = 1;
    s[1] = hi[2] - lo[2];
    s[0] = s[1] * (hi[1] - lo[1]);
    return s;
  }

  std::string str() const {
    std::string s;
    for (int d = 0; d < ndim; ++d) {
      if (d) s += "x";
      s += "[" + std::to_string(lo[d]) + "," + std::to_string(hi[d]) + ")";
    }
    return s.empty() ? "[]" : s;
  }
};

}  // namespace ooc
