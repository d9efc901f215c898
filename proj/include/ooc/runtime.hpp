#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ooc/cache_exec.hpp"
#include "ooc/chain.hpp"
#include "ooc/explicit_exec.hpp"
#include "ooc/metrics.hpp"
#include "ooc/reference.hpp"
#include "ooc/tiler.hpp"
#include "ooc/unified_exec.hpp"

namespace ooc {

enum class ExecutorKind { reference, tiled_cache, tiled_explicit, unified };

inline const char* executor_name(ExecutorKind k) {
  switch (k) {
    case ExecutorKind::reference:
      return "reference";
    case ExecutorKind::tiled_cache:
      return "cache";
    case ExecutorKind::tiled_explicit:
      return "explicit";
    default:
      return "unified";
  }
}

struct RuntimeOptions {
  ExecutorKind executor = ExecutorKind::reference;
  DeviceConfig device;
  int tiles = 0;  // 0 = choose by capacity
  int tiled_dim = 0;
  bool prefetch = false;
  ExecPolicy policy = default_exec_policy();
  bool record_chains = false;  // keep every flushed chain (tests, plan dumps)
};

struct FlushRecord {
  int chain_id;
  FlushReason reason;
  int loop_count;
};

/// Queues loops lazily and flushes them through the configured executor
/// whenever an API call has to return data (a reduction result, a dataset
/// fetch) or the program ends. Values returned to the caller are bitwise
/// identical across executors as long as nothing was discarded cyclically.
class Runtime {
 public:
  explicit Runtime(RuntimeOptions opts = {}) : opts_(opts) {}

  Mesh& mesh() { return mesh_; }
  const Mesh& mesh() const { return mesh_; }
  const RuntimeOptions& options() const { return opts_; }

  DatasetId declare(const std::string& name, const Extent& core, Point halo,
                    index_t elem_bytes, double fill) {
    return declare_dataset(mesh_, name, core, halo, elem_bytes, fill);
  }
  DatasetId declare(const std::string& name, const Extent& core, Point halo, index_t elem_bytes,
                    const std::function<double(Point)>& fill) {
    return declare_dataset(mesh_, name, core, halo, elem_bytes, fill);
  }

  /// Appends the loop to the pending chain. A reducing loop flushes the
  /// chain right after itself so its result is immediately available.
  void enqueue_loop(ParLoop loop);

  /// Flushes, then returns a copy of the dataset's host buffer.
  /// Throws StaleDataError when cyclic execution discarded its values.
  std::vector<double> fetch_dataset(DatasetId d);

  /// Result of the latest reduction with this name.
  double fetch_reduction(const std::string& name);

  void set_cyclic_flag(bool on) { cyclic_ = on; }
  bool cyclic_flag() const { return cyclic_; }

  void flush(FlushReason reason = FlushReason::explicit_flush);
  void finish() { flush(FlushReason::program_end); }

  int pending_loops() const { return static_cast<int>(pending_.size()); }
  int chains_flushed() const { return next_chain_id_; }

  const std::vector<FlushRecord>& flush_log() const { return flush_log_; }
  const std::vector<LoopMetric>& loop_metrics() const { return loop_metrics_; }
  const std::vector<AuditRow>& audit_rows() const { return audit_; }
  const std::vector<TimelineEntry>& timeline_entries() const { return timeline_; }
  double makespan() const { return makespan_; }
  index_t uploaded() const { return uploaded_; }
  index_t downloaded() const { return downloaded_; }
  index_t d2d_bytes() const { return d2d_; }
  const LruPager::Stats& cache_stats() const { return cache_stats_; }
  index_t faults() const { return faults_; }
  PlanCache& plan_cache() { return plans_; }
  DeviceState& device_state() { return device_; }
  const std::optional<LoopChain>& last_chain() const { return last_chain_; }
  const std::vector<LoopChain>& chain_log() const { return chain_log_; }
  int last_tile_count() const { return last_tiles_; }

  /// Aggregated report over everything executed so far.
  RunReport report() const;

 private:
  void execute(LoopChain&& chain);
  const PlanCache::Entry& plan_for(const LoopChain& chain);

  RuntimeOptions opts_;
  Mesh mesh_;
  std::vector<ParLoop> pending_;
  bool cyclic_ = false;
  int next_loop_id_ = 0;
  int next_chain_id_ = 0;

  PlanCache plans_;
  DeviceState device_;

  std::vector<FlushRecord> flush_log_;
  std::vector<LoopMetric> loop_metrics_;
  std::map<int, size_t> metric_index_;  // loop id -> row
  std::vector<AuditRow> audit_;
  std::vector<TimelineEntry> timeline_;
  double makespan_ = 0.0;
  double last_kernel_end_ = 0.0;
  index_t uploaded_ = 0, downloaded_ = 0, d2d_ = 0;
  LruPager::Stats cache_stats_;
  index_t faults_ = 0;
  std::map<std::string, double> reductions_;
  int last_tiles_ = 1;
  std::optional<LoopChain> last_chain_;
  std::vector<LoopChain> chain_log_;
};

}  // namespace ooc
