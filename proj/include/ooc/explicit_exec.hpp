#pragma once

#include <map>
#include <vector>

#include "ooc/chain.hpp"
#include "ooc/command.hpp"
#include "ooc/kernel_exec.hpp"
#include "ooc/pager.hpp"
#include "ooc/tiler.hpp"

namespace ooc {

struct ExecOptions {
  bool cyclic = false;    // discard write-first data instead of downloading
  bool prefetch = false;  // speculatively upload the next chain's first tile
  ExecPolicy policy = ExecPolicy::serial;
};

struct AuditRow {
  DatasetId dataset = -1;
  int tile = -1;  // == tile_count marks speculative uploads staged for the next chain
  index_t uploaded = 0, downloaded = 0, d2d = 0;
};

struct ExecResult {
  CommandQueueProgram program;
  Timeline timeline;
  std::vector<AuditRow> audit;
  std::map<int, double> reductions;  // loop id -> value
  LruPager::Stats cache_stats;       // cache mode
  index_t faults = 0;                // unified mode
};

/// Device-side state that survives between chains: the queue timelines
/// (so consecutive chains overlap like work on persistent streams), the
/// slot rotation, the speculative uploads staged for the next chain, and
/// (for cache/unified modes) page residency.
struct DeviceState {
  QueueCarry queues;
  int slot_cursor = 0;

  struct Staged {
    Extent region;
    std::vector<double> data;  // row-major over `region`
  };
  std::map<DatasetId, Staged> staged;

  PageSpace space;
  LruPager pager;
  bool pager_ready = false;

  void invalidate_staged(DatasetId d) { staged.erase(d); }
};

/// Runs a planned chain through the explicitly managed three-slot pipeline:
/// per tile, upload the next tile's right footprint while the current tile's
/// kernels run and the previous tile's left footprint downloads, carrying
/// the overlap between consecutive tiles device-to-device. Read-only
/// datasets are never downloaded and write-first datasets never uploaded;
/// `cyclic` additionally skips their downloads and marks the host copies
/// stale.
ExecResult run_chain_explicit(Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                              const Footprints& fp, const DeviceConfig& cfg,
                              const ExecOptions& opts, DeviceState& state);

}  // namespace ooc
