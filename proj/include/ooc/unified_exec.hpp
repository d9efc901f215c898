#pragma once

#include "ooc/explicit_exec.hpp"

namespace ooc {

/// Runs the chain under the demand-paged model: kernels touching
/// non-resident pages stall serially for fault_latency plus the page
/// transfer (page migration is latency-bound), evicted pages migrate back.
/// With opts.prefetch, page ranges move in bulk around each tile instead:
/// the tile's retired pages are pushed to the host on the kernel queue,
/// the next tile's pages pulled on a second queue, and execution hops to
/// the third queue each tile. Residency persists across chains.
ExecResult run_chain_unified(Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                             const Footprints& fp, const DeviceConfig& cfg,
                             const ExecOptions& opts, DeviceState& state);

}  // namespace ooc
