#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ooc/dataset.hpp"
#include "ooc/expr.hpp"
#include "ooc/stencil.hpp"

namespace ooc {

enum class AccessMode { read, write, read_write };

inline bool access_reads(AccessMode m) { return m != AccessMode::write; }
inline bool access_writes(AccessMode m) { return m != AccessMode::read; }
inline const char* access_name(AccessMode m) {
  return m == AccessMode::read ? "READ" : m == AccessMode::write ? "WRITE" : "READ_WRITE";
}

struct LoopArg {
  DatasetId dataset;
  Stencil stencil;
  AccessMode mode;
};

enum class ReduceOp { none, sum, min, max };

/// Per written argument: the expression producing the value stored at the
/// iteration point. Optionally one reduction folding an expression over
/// the range into a named scalar.
struct KernelSpec {
  struct Write {
    int arg;
    ExprPtr expr;
  };
  std::vector<Write> writes;
  ReduceOp reduce = ReduceOp::none;
  ExprPtr reduce_expr;
  std::string reduce_name;
};

/// One parallel loop: iterate `range`, apply the kernel at each point.
/// Points are independent by construction (writes land only at offset 0),
/// so any execution order yields identical buffers.
struct ParLoop {
  int id = -1;
  Extent range;
  std::vector<LoopArg> args;
  KernelSpec kernel;

  // compiled by validate_loop
  std::vector<ExprTape> write_tapes;
  ExprTape reduce_tape;

  bool has_reduction() const { return kernel.reduce != ReduceOp::none; }
  bool writes_dataset(DatasetId d) const {
    for (const auto& a : args)
      if (a.dataset == d && access_writes(a.mode)) return true;
    return false;
  }
  bool reads_dataset(DatasetId d) const {
    for (const auto& a : args)
      if (a.dataset == d && access_reads(a.mode)) return true;
    return false;
  }
};

/// Checks the loop contract against the mesh and compiles the expression
/// tapes. Throws ValidationError; returns the loop ready to enqueue.
///   - write-access stencils must be the single zero offset
///   - a written dataset appears in exactly one argument and is not read
///     through any other argument (keeps points order-independent)
///   - range must lie inside the core of every written dataset
///   - range expanded by each read stencil must lie inside core+halo
///   - every read(arg, offset) must name a readable argument and a declared
///     offset of its stencil
void validate_loop(const Mesh& mesh, ParLoop& loop);

/// Useful bytes one iteration point moves: elem_bytes once per argument,
/// twice for read-write arguments. Offsets never multiply the count. This
/// single definition feeds every bandwidth figure reported anywhere.
inline index_t loop_bytes_per_point(const Mesh& mesh, const ParLoop& loop) {
  index_t per_point = 0;
  for (const auto& a : loop.args)
    per_point += mesh[a.dataset].elem_bytes * (a.mode == AccessMode::read_write ? 2 : 1);
  return per_point;
}

/// Reduction identity / combine, fixed to row-major point order everywhere
/// so tiled and untiled runs produce bitwise identical results.
inline double reduce_identity(ReduceOp op) {
  switch (op) {
    case ReduceOp::sum:
      return 0.0;
    case ReduceOp::min:
      return std::numeric_limits<double>::infinity();
    case ReduceOp::max:
      return -std::numeric_limits<double>::infinity();
    default:
      return 0.0;
  }
}
inline double reduce_combine(ReduceOp op, double acc, double v) {
  switch (op) {
    case ReduceOp::sum:
      return acc + v;
    case ReduceOp::min:
      return std::min(acc, v);
    case ReduceOp::max:
      return std::max(acc, v);
    default:
      return acc;
  }
}

}  // namespace ooc
