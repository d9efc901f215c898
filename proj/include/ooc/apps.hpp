#pragma once

#include <string>
#include <vector>

#include "ooc/runtime.hpp"

namespace ooc {

/// Bundled demonstration applications. All are 2-D:
///   heat2d     — two fields ping-ponging through one 5-point loop per
///                iteration.
///   miniflow2d — four persistent fields (one read-only) plus six
///                write-first temporaries, 14 loops per iteration mixing
///                point/3-point/5-point stencils, a field summary
///                reduction every 10th iteration.
///   rk3chain   — low-storage three-stage scheme, 3 loops per stage over
///                six datasets (three of them temporaries, two read-only),
///                no reductions, so chains can span several timesteps.
struct AppParams {
  std::string name = "heat2d";
  index_t nx = 64, ny = 64;
  int iters = 10;
  int tile_span = 0;  // iterations (heat2d/miniflow2d) or timesteps (rk3chain) per chain
  bool cyclic = false;
};

std::vector<std::string> app_names();

/// Declares the app's datasets and enqueues all its loops on the runtime,
/// ending with a final flush. Throws on unknown app names.
void run_app(Runtime& rt, const AppParams& params);

/// Total bytes of all datasets the app would declare (for capacity ratios).
index_t app_problem_bytes(const AppParams& params);

/// Average bandwidth of the in-memory baseline: same executor, one tile,
/// capacity comfortably above the problem, the whole run in one chain.
double app_baseline_bandwidth(const AppParams& params, const RuntimeOptions& opts);

/// One run per (size, mode); failures become rows with an error column and
/// the sweep continues. Returns the combined report CSV.
std::string scaling_sweep(const AppParams& base_params,
                          const std::vector<std::pair<index_t, index_t>>& sizes,
                          const std::vector<ExecutorKind>& modes, const RuntimeOptions& base_opts,
                          double capacity_ratio);

}  // namespace ooc
