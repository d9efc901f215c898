#pragma once

#include <map>
#include <string>
#include <vector>

#include "ooc/chain.hpp"
#include "ooc/kernel_exec.hpp"

namespace ooc {

struct ReferenceResult {
  std::map<int, double> reductions;        // loop id -> value
  std::vector<double> loop_wall_seconds;   // one entry per loop, in order
};

/// Runs the chain directly on the host buffers, loops in order, points in
/// row-major order. This is the oracle every simulated mode must match
/// bitwise.
ReferenceResult run_chain_reference(Mesh& mesh, const LoopChain& chain,
                                    ExecPolicy policy = ExecPolicy::serial);

}  // namespace ooc
