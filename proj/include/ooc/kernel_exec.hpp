#pragma once

#include <vector>

#include "ooc/loop.hpp"

namespace ooc {

/// Dense row-major storage window for one loop argument: `data` covers
/// exactly `box`. Host execution passes whole allocations; the explicit
/// device executor passes per-tile arenas.
struct ArgView {
  double* data;
  Extent box;
};

enum class ExecPolicy { serial, openmp };

/// Returns the compiled-in default: openmp when built with OpenMP support.
ExecPolicy default_exec_policy();

/// Applies `loop`'s kernel at every point of `range` against the given
/// views (one per argument). Writes land at offset 0 of each written
/// argument; the reduction, if any, is folded into *reduction_acc strictly
/// in row-major point order so serial and parallel runs are bitwise equal.
///
/// Every access is checked to resolve inside its view's box before any
/// point runs; a violation is a caller bug and aborts.
void apply_loop(const ParLoop& loop, const Extent& range, const std::vector<ArgView>& views,
                ExecPolicy policy, double* reduction_acc = nullptr);

}  // namespace ooc
