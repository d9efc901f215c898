#include "ooc/kernel_exec.hpp"

#include <cassert>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ooc {

ExecPolicy default_exec_policy() {
#ifdef _OPENMP
  return ExecPolicy::openmp;
#else
  return ExecPolicy::serial;
#endif
}

namespace {

constexpr int kMaxStack = 32;

struct ResolvedIns {
  ExprOp op;
  int arg;
  double value;
  index_t delta;  // flattened offset inside the argument's view
};

std::vector<ResolvedIns> resolve_tape(const ExprTape& tape, const std::vector<ArgView>& views) {
  std::vector<ResolvedIns> out;
  out.reserve(tape.ins.size());
  for (const auto& in : tape.ins) {
    ResolvedIns ri{in.op, in.arg, in.value, 0};
    if (in.op == ExprOp::read) {
      Point s = views[in.arg].box.strides();
      ri.delta = in.offset[0] * s[0] + in.offset[1] * s[1] + in.offset[2] * s[2];
    }
    out.push_back(ri);
  }
  return out;
}

inline double eval(const ResolvedIns* ins, size_t n, double* const* base, index_t i) {
  double stack[kMaxStack];
  int sp = 0;
  for (size_t k = 0; k < n; ++k) {
    const ResolvedIns& in = ins[k];
    switch (in.op) {
      case ExprOp::constant:
        stack[sp++] = in.value;
        break;
      case ExprOp::read:
        stack[sp++] = base[in.arg][i + in.delta];
        break;
      case ExprOp::coord:
        stack[sp++] = 0.0;  // rejected by validation; unreachable in kernels
        break;
      case ExprOp::add:
        --sp;
        stack[sp - 1] += stack[sp];
        break;
      case ExprOp::sub:
        --sp;
        stack[sp - 1] -= stack[sp];
        break;
      case ExprOp::mul:
        --sp;
        stack[sp - 1] *= stack[sp];
        break;
      case ExprOp::divide:
        --sp;
        stack[sp - 1] /= stack[sp];
        break;
      case ExprOp::min:
        --sp;
        stack[sp - 1] = std::min(stack[sp - 1], stack[sp]);
        break;
      case ExprOp::max:
        --sp;
        stack[sp - 1] = std::max(stack[sp - 1], stack[sp]);
        break;
    }
  }
  return stack[0];
}

// Box-level containment implies per-access containment: accesses are
// exactly range ⊕ stencil offsets.
void check_containment(const ParLoop& loop, const Extent& range,
                       const std::vector<ArgView>& views) {
  for (size_t a = 0; a < loop.args.size(); ++a) {
    auto [elo, ehi] = stencil_extents(loop.args[a].stencil);
    Extent reach = access_reads(loop.args[a].mode) ? range.expand(elo, ehi) : range;
    if (!views[a].box.contains(reach)) {
      std::fprintf(stderr, "ooc: loop %d access %s of arg %zu escapes its view %s\n", loop.id,
                   reach.str().c_str(), a, views[a].box.str().c_str());
      std::abort();
    }
  }
}

// Decomposes a range into contiguous rows along dim ndim-1 (whose stride
// is always 1 because trailing dimensions are kept as [0,1)).
struct RowCursor {
  const Extent& range;
  int inner_dim;
  index_t n_mid;  // length of dim 1 when rank 3, else 1

  explicit RowCursor(const Extent& r)
      : range(r), inner_dim(r.ndim - 1), n_mid(r.ndim == 3 ? r.len(1) : 1) {}

  index_t rows() const {
    if (range.ndim == 1) return 1;
    if (range.ndim == 2) return range.len(0);
    return range.len(0) * range.len(1);
  }
  index_t inner() const { return range.len(inner_dim); }

  Point row_start(index_t row) const {
    Point p{0, 0, 0};
    if (range.ndim >= 2) p[0] = range.lo[0] + (range.ndim == 3 ? row / n_mid : row);
    if (range.ndim == 3) p[1] = range.lo[1] + row % n_mid;
    p[inner_dim] = range.lo[inner_dim];
    return p;
  }
};

}  // namespace

void apply_loop(const ParLoop& loop, const Extent& range, const std::vector<ArgView>& views,
                ExecPolicy policy, double* reduction_acc) {
  if (range.empty()) return;
  assert(views.size() == loop.args.size());
  check_containment(loop, range, views);

  const size_t n_writes = loop.kernel.writes.size();
  std::vector<std::vector<ResolvedIns>> wtapes(n_writes);
  std::vector<int> warg(n_writes);
  for (size_t w = 0; w < n_writes; ++w) {
    wtapes[w] = resolve_tape(loop.write_tapes[w], views);
    warg[w] = loop.kernel.writes[w].arg;
    assert(loop.write_tapes[w].max_stack <= kMaxStack);
  }
  const bool reducing = loop.has_reduction() && reduction_acc != nullptr;
  std::vector<ResolvedIns> rtape;
  if (reducing) rtape = resolve_tape(loop.reduce_tape, views);

  const size_t n_args = loop.args.size();
  RowCursor rc(range);
  const index_t rows = rc.rows();
  const index_t inner = rc.inner();

  // Per-point contributions are staged so the fold below runs in row-major
  // order no matter how rows were scheduled.
  std::vector<double> scratch;
  if (reducing) scratch.resize(static_cast<size_t>(rows * inner));

  auto run_row = [&](index_t row) {
    const Point start = rc.row_start(row);
    double* base[16];
    assert(n_args <= 16);
    for (size_t a = 0; a < n_args; ++a) {
      const Extent& b = views[a].box;
      Point s = b.strides();
      base[a] = views[a].data + (start[0] - b.lo[0]) * s[0] + (start[1] - b.lo[1]) * s[1] +
                (start[2] - b.lo[2]);
    }
    double out[8];
    assert(n_writes <= 8);
    for (index_t i = 0; i < inner; ++i) {
      for (size_t w = 0; w < n_writes; ++w)
        out[w] = eval(wtapes[w].data(), wtapes[w].size(), base, i);
      if (reducing)
        scratch[static_cast<size_t>(row * inner + i)] = eval(rtape.data(), rtape.size(), base, i);
      for (size_t w = 0; w < n_writes; ++w) base[warg[w]][i] = out[w];
    }
  };

  if (policy == ExecPolicy::openmp) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (index_t row = 0; row < rows; ++row) run_row(row);
#else
    for (index_t row = 0; row < rows; ++row) run_row(row);
#endif
  } else {
    for (index_t row = 0; row < rows; ++row) run_row(row);
  }

  if (reducing) {
    double acc = *reduction_acc;
    for (double v : scratch) acc = reduce_combine(loop.kernel.reduce, acc, v);
    *reduction_acc = acc;
  }
}

}  // namespace ooc
