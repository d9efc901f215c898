#include "ooc/cache_exec.hpp"

namespace ooc {

namespace {

struct AuditMap {
  std::map<std::pair<DatasetId, int>, AuditRow> rows;
  AuditRow& at(DatasetId d, int tile) {
    AuditRow& r = rows[{d, tile}];
    r.dataset = d;
    r.tile = tile;
    return r;
  }
};

void ensure_pager(Mesh& mesh, const DeviceConfig& cfg, DeviceState& state) {
  if (state.pager_ready && state.space.base.size() == mesh.datasets.size() &&
      state.space.page_bytes == cfg.cache_page_bytes)
    return;
  state.space.build(mesh, cfg.cache_page_bytes);
  state.pager.reset(std::max<index_t>(cfg.capacity_bytes / cfg.cache_page_bytes, 1));
  state.pager_ready = true;
}

}  // namespace

ExecResult run_chain_cache(Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                           const DeviceConfig& cfg, const ExecOptions& opts, DeviceState& state) {
  ensure_pager(mesh, cfg, state);
  ExecResult res;
  res.program = CommandQueueProgram(&state.queues);
  AuditMap audit;
  const auto stats_before = state.pager.stats();
  const double page_bytes = static_cast<double>(cfg.cache_page_bytes);
  const double hit_cost = page_bytes / cfg.device_kernel_bandwidth;
  const double miss_cost = page_bytes / cfg.h2d_bandwidth;
  const double writeback_cost = page_bytes / cfg.d2h_bandwidth;

  std::vector<double> red_acc(chain.loops.size());
  for (size_t j = 0; j < chain.loops.size(); ++j)
    red_acc[j] = reduce_identity(chain.loops[j].kernel.reduce);

  for (int t = 0; t < plan.tile_count; ++t) {
    for (size_t j = 0; j < chain.loops.size(); ++j) {
      const ParLoop& loop = chain.loops[j];
      Extent sub = plan.subrange(static_cast<int>(j), t);
      if (sub.empty()) continue;

      double modelled = 0.0;
      walk_access_segments(mesh, state.space, loop, sub,
                           [&](DatasetId, index_t b0, index_t b1, bool writes) {
                             index_t p0 = b0 / cfg.cache_page_bytes;
                             index_t p1 = (b1 - 1) / cfg.cache_page_bytes;
                             for (index_t p = p0; p <= p1; ++p) {
                               bool hit = state.pager.touch(p, writes, [&](index_t victim,
                                                                           bool dirty) {
                                 if (!dirty) return;
                                 modelled += writeback_cost;
                                 audit.at(state.space.dataset_of_page(victim), t).downloaded +=
                                     cfg.cache_page_bytes;
                               });
                               if (hit) {
                                 modelled += hit_cost;
                               } else {
                                 modelled += miss_cost;
                                 audit.at(state.space.dataset_of_page(p), t).uploaded +=
                                     cfg.cache_page_bytes;
                               }
                             }
                           });

      Command c;
      c.kind = CmdKind::kernel;
      c.queue = 0;
      c.bytes = sub.size() * loop_bytes_per_point(mesh, loop);
      c.tile = t;
      c.loop = loop.id;
      double base = static_cast<double>(c.bytes) / cfg.device_kernel_bandwidth;
      c.extra_seconds = std::max(0.0, modelled - base);
      res.program.push(c);

      std::vector<ArgView> views;
      views.reserve(loop.args.size());
      for (const auto& a : loop.args) {
        Dataset& ds = mesh[a.dataset];
        views.push_back({ds.host.data(), ds.alloc()});
        if (access_writes(a.mode)) ds.ever_written = true;
      }
      apply_loop(loop, sub, views, opts.policy, loop.has_reduction() ? &red_acc[j] : nullptr);
    }
  }

  for (size_t j = 0; j < chain.loops.size(); ++j)
    if (chain.loops[j].has_reduction()) res.reductions[chain.loops[j].id] = red_acc[j];

  res.timeline = simulate_timeline(res.program, cfg, &state.queues);
  res.cache_stats.hits = state.pager.stats().hits - stats_before.hits;
  res.cache_stats.misses = state.pager.stats().misses - stats_before.misses;
  res.cache_stats.evictions = state.pager.stats().evictions - stats_before.evictions;
  res.cache_stats.dirty_evictions =
      state.pager.stats().dirty_evictions - stats_before.dirty_evictions;
  for (auto& [k, v] : audit.rows) {
    res.timeline.uploaded += v.uploaded;
    res.timeline.downloaded += v.downloaded;
    res.audit.push_back(v);
  }
  return res;
}

}  // namespace ooc
