#include "ooc/runtime.hpp"

namespace ooc {

void Runtime::enqueue_loop(ParLoop loop) {
  validate_loop(mesh_, loop);
  loop.id = next_loop_id_++;
  bool reduces = loop.has_reduction();
  pending_.push_back(std::move(loop));
  if (reduces) flush(FlushReason::reduction_fetch);
}

std::vector<double> Runtime::fetch_dataset(DatasetId d) {
  flush(FlushReason::data_fetch);
  Dataset& ds = mesh_[d];
  if (ds.host_stale) throw StaleDataError(ds.name, ds.stale_chain);
  device_.invalidate_staged(d);  // returned data may change before the next chain
  return ds.host;
}

double Runtime::fetch_reduction(const std::string& name) {
  flush(FlushReason::data_fetch);
  auto it = reductions_.find(name);
  if (it == reductions_.end()) throw ValidationError("unknown reduction '" + name + "'");
  return it->second;
}

void Runtime::flush(FlushReason reason) {
  if (pending_.empty()) return;
  LoopChain chain;
  chain.chain_id = next_chain_id_++;
  chain.reason = reason;
  chain.loops = std::move(pending_);
  pending_.clear();
  flush_log_.push_back({chain.chain_id, reason, static_cast<int>(chain.loops.size())});
  last_chain_ = chain;
  if (opts_.record_chains) chain_log_.push_back(chain);
  execute(std::move(chain));
}

const PlanCache::Entry& Runtime::plan_for(const LoopChain& chain) {
  if (opts_.tiles > 0) return plans_.get(mesh_, chain, opts_.tiles, opts_.tiled_dim);

  // Budget such that the per-slot working set fits the intended share of
  // fast memory: a full three-slot pipeline for the explicit mode, the
  // whole capacity per tile in cache mode, half in unified mode so the
  // current and prefetched tiles can both stay resident.
  index_t budget;
  switch (opts_.executor) {
    case ExecutorKind::tiled_cache:
      budget = 3 * opts_.device.capacity_bytes;
      break;
    case ExecutorKind::unified:
      budget = 3 * opts_.device.capacity_bytes / 2;
      break;
    default:
      budget = opts_.device.capacity_bytes;
      break;
  }
  TileChoice choice = choose_tile_count(mesh_, chain, budget, opts_.tiled_dim);
  return plans_.get(mesh_, chain, choice.tile_count, opts_.tiled_dim);
}

void Runtime::execute(LoopChain&& chain) {
  auto note_loop = [&](const ParLoop& loop) -> LoopMetric& {
    auto it = metric_index_.find(loop.id);
    if (it == metric_index_.end()) {
      LoopMetric m;
      m.loop_id = loop.id;
      m.points = loop.range.size();
      m.bytes = loop_metric_bytes(mesh_, loop);
      metric_index_[loop.id] = loop_metrics_.size();
      loop_metrics_.push_back(m);
      return loop_metrics_.back();
    }
    return loop_metrics_[it->second];
  };

  if (opts_.executor == ExecutorKind::reference) {
    ReferenceResult rr = run_chain_reference(mesh_, chain, opts_.policy);
    for (size_t j = 0; j < chain.loops.size(); ++j) {
      LoopMetric& m = note_loop(chain.loops[j]);
      m.time_s += rr.loop_wall_seconds[j];
      m.bandwidth = m.time_s > 0 ? static_cast<double>(m.bytes) / m.time_s : 0.0;
      makespan_ += rr.loop_wall_seconds[j];
      if (chain.loops[j].has_reduction())
        reductions_[chain.loops[j].kernel.reduce_name] = rr.reductions[chain.loops[j].id];
    }
    last_tiles_ = 1;
    return;
  }

  const PlanCache::Entry& entry = plan_for(chain);
  last_tiles_ = entry.plan.tile_count;

  // A chain that would upload a cyclically discarded dataset would ship
  // garbage; only chains that write it first may touch it again.
  if (opts_.executor == ExecutorKind::tiled_explicit) {
    for (size_t d = 0; d < entry.footprints.per_dataset.size(); ++d) {
      const auto& pd = entry.footprints.per_dataset[d];
      if (pd.accessed && mesh_[static_cast<DatasetId>(d)].host_stale && !pd.write_first)
        throw StaleDataError(mesh_[static_cast<DatasetId>(d)].name,
                             mesh_[static_cast<DatasetId>(d)].stale_chain);
    }
  }

  ExecOptions eopts;
  eopts.cyclic = cyclic_;
  eopts.prefetch = opts_.prefetch;
  eopts.policy = opts_.policy;

  ExecResult res;
  switch (opts_.executor) {
    case ExecutorKind::tiled_explicit:
      res = run_chain_explicit(mesh_, chain, entry.plan, entry.footprints, opts_.device, eopts,
                               device_);
      break;
    case ExecutorKind::tiled_cache:
      res = run_chain_cache(mesh_, chain, entry.plan, opts_.device, eopts, device_);
      break;
    default:
      res = run_chain_unified(mesh_, chain, entry.plan, entry.footprints, opts_.device, eopts,
                              device_);
      break;
  }

  std::map<int, double> times = attribute_loop_times(res.timeline, &last_kernel_end_);
  for (const auto& loop : chain.loops) {
    LoopMetric& m = note_loop(loop);
    auto it = times.find(loop.id);
    if (it != times.end()) m.time_s += it->second;
    m.bandwidth = m.time_s > 0 ? static_cast<double>(m.bytes) / m.time_s : 0.0;
    if (loop.has_reduction()) reductions_[loop.kernel.reduce_name] = res.reductions[loop.id];
  }

  // the timeline is continuous across chains: queue state carried over
  for (const TimelineEntry& e : res.timeline.entries) timeline_.push_back(e);
  makespan_ = std::max(makespan_, res.timeline.makespan);
  uploaded_ += res.timeline.uploaded;
  downloaded_ += res.timeline.downloaded;
  d2d_ += res.timeline.d2d_bytes;
  cache_stats_.hits += res.cache_stats.hits;
  cache_stats_.misses += res.cache_stats.misses;
  cache_stats_.evictions += res.cache_stats.evictions;
  cache_stats_.dirty_evictions += res.cache_stats.dirty_evictions;
  faults_ += res.faults;
  for (const auto& row : res.audit) audit_.push_back(row);
}

RunReport Runtime::report() const {
  RunReport r = aggregate(loop_metrics_);
  r.mode = executor_name(opts_.executor);
  r.tiles = opts_.tiles > 0 ? opts_.tiles : last_tiles_;
  r.makespan = makespan_;
  r.uploaded = uploaded_;
  r.downloaded = downloaded_;
  r.d2d = d2d_;
  r.capacity = opts_.device.capacity_bytes;
  if (opts_.executor == ExecutorKind::tiled_cache) {
    index_t touches = cache_stats_.hits + cache_stats_.misses;
    r.hit_rate = touches > 0 ? static_cast<double>(cache_stats_.hits) / touches : -1.0;
  }
  if (opts_.executor == ExecutorKind::unified) r.faults = faults_;
  return r;
}

}  // namespace ooc
