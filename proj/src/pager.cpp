#include "ooc/pager.hpp"

#include <algorithm>

namespace ooc {

namespace {

struct OuterSeg {
  index_t off0, off1;      // outer offsets (dims before the inner one)
  index_t inner_lo, inner_hi;  // inner-offset extremes for this outer pair
};

std::vector<OuterSeg> outer_segments(const Stencil& st, int ndim) {
  const int inner_dim = ndim - 1;
  std::vector<OuterSeg> segs;
  for (const auto& off : st.offsets) {
    index_t o0 = ndim >= 2 ? off[0] : 0;
    index_t o1 = ndim == 3 ? off[1] : 0;
    index_t oi = off[inner_dim];
    bool found = false;
    for (auto& s : segs)
      if (s.off0 == o0 && s.off1 == o1) {
        s.inner_lo = std::min(s.inner_lo, oi);
        s.inner_hi = std::max(s.inner_hi, oi);
        found = true;
        break;
      }
    if (!found) segs.push_back({o0, o1, oi, oi});
  }
  return segs;
}

}  // namespace

void walk_access_segments(const Mesh& mesh, const PageSpace& space, const ParLoop& loop,
                          const Extent& sub,
                          const std::function<void(DatasetId, index_t, index_t, bool)>& fn) {
  if (sub.empty()) return;
  const int ndim = sub.ndim;
  const int inner_dim = ndim - 1;

  struct ArgWalk {
    DatasetId d;
    bool writes;
    Extent alloc;
    Point strides;
    std::vector<OuterSeg> segs;
  };
  std::vector<ArgWalk> walks;
  walks.reserve(loop.args.size());
  for (const auto& a : loop.args) {
    ArgWalk w;
    w.d = a.dataset;
    w.writes = access_writes(a.mode);
    w.alloc = mesh[a.dataset].alloc();
    w.strides = w.alloc.strides();
    w.segs = outer_segments(a.stencil, ndim);
    walks.push_back(std::move(w));
  }

  const index_t rows0 = ndim >= 2 ? sub.len(0) : 1;
  const index_t rows1 = ndim == 3 ? sub.len(1) : 1;
  const index_t inner_len = sub.len(inner_dim);

  for (index_t r0 = 0; r0 < rows0; ++r0)
    for (index_t r1 = 0; r1 < rows1; ++r1) {
      Point p{0, 0, 0};
      if (ndim >= 2) p[0] = sub.lo[0] + r0;
      if (ndim == 3) p[1] = sub.lo[1] + r1;
      for (const auto& w : walks)
        for (const auto& s : w.segs) {
          Point q = p;
          if (ndim >= 2) q[0] += s.off0;
          if (ndim == 3) q[1] += s.off1;
          q[inner_dim] = sub.lo[inner_dim] + s.inner_lo;
          index_t first = w.alloc.flatten(q);
          index_t count = inner_len + (s.inner_hi - s.inner_lo);
          auto [b0, b1] = space.element_run(mesh, w.d, first, count);
          fn(w.d, b0, b1, w.writes);
        }
    }
}

}  // namespace ooc
