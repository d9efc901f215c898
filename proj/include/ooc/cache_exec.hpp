#pragma once

#include "ooc/explicit_exec.hpp"

namespace ooc {

/// Runs the chain with fast memory modelled as a transparent LRU page
/// cache over host data (KNL-style cache mode). Results are computed
/// directly on the host buffers; the pager only prices each access: a hit
/// costs page_bytes/device_kernel_bandwidth, a miss page_bytes/h2d plus a
/// writeback on dirty eviction. Residency persists across chains.
ExecResult run_chain_cache(Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                           const DeviceConfig& cfg, const ExecOptions& opts, DeviceState& state);

}  // namespace ooc
