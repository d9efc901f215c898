#include "ooc/unified_exec.hpp"

#include <set>

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

/// Page ids whose byte ranges intersect a box region of one dataset.
std::set<index_t> region_pages(const Mesh& mesh, const PageSpace& space, DatasetId d,
                               const Extent& region) {
  std::set<index_t> pages;
  if (region.empty()) return pages;
  const Extent alloc = mesh[d].alloc();
  const int inner = region.ndim - 1;
  const index_t run = region.len(inner);
  const index_t n0 = region.ndim >= 2 ? region.len(0) : 1;
  const index_t n1 = region.ndim == 3 ? region.len(1) : 1;
  for (index_t r0 = 0; r0 < n0; ++r0)
    for (index_t r1 = 0; r1 < n1; ++r1) {
      Point p = region.lo;
      if (region.ndim >= 2) p[0] = region.lo[0] + r0;
      if (region.ndim == 3) p[1] = region.lo[1] + r1;
      p[inner] = region.lo[inner];
      auto [b0, b1] = space.element_run(mesh, d, alloc.flatten(p), run);
      for (index_t pg = b0 / space.page_bytes; pg <= (b1 - 1) / space.page_bytes; ++pg)
        pages.insert(pg);
    }
  return pages;
}

}  // namespace

ExecResult run_chain_unified(Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                             const Footprints& fp, const DeviceConfig& cfg,
                             const ExecOptions& opts, DeviceState& state) {
  ensure_pager(mesh, cfg, state);
  ExecResult res;
  res.program = CommandQueueProgram(&state.queues);
  AuditMap audit;
  const index_t page_bytes = cfg.cache_page_bytes;
  const bool oversubscribed = state.space.total_bytes > cfg.capacity_bytes;
  const double pf_rate = cfg.prefetch_bandwidth *
                         (oversubscribed ? cfg.prefetch_degradation : 1.0);
  (void)pf_rate;  // rate selection happens in the timeline via prefetch_rate

  std::vector<DatasetId> used;
  for (size_t d = 0; d < fp.per_dataset.size(); ++d)
    if (fp.per_dataset[d].accessed) used.push_back(static_cast<DatasetId>(d));

  std::vector<double> red_acc(chain.loops.size());
  for (size_t j = 0; j < chain.loops.size(); ++j)
    red_acc[j] = reduce_identity(chain.loops[j].kernel.reduce);

  int kq = 0, pq = 1, iq = 2;

  auto device_prefetch = [&](int tile_data, int queue, int audit_tile) {
    index_t moved = 0;
    std::map<DatasetId, index_t> evicted;
    for (DatasetId d : used) {
      const Extent& region = fp.per_dataset[d].full[tile_data];
      index_t ds_moved = 0;
      for (index_t pg : region_pages(mesh, state.space, d, region))
        if (state.pager.admit(pg, [&](index_t victim, bool) {
              evicted[state.space.dataset_of_page(victim)] += page_bytes;
            }))
          ds_moved += page_bytes;
      if (ds_moved > 0) {
        Command c;
        c.kind = CmdKind::h2d;
        c.queue = queue;
        c.bytes = ds_moved;
        c.dataset = d;
        c.tile = audit_tile;
        c.prefetch_rate = true;
        res.program.push(c);
        audit.at(d, audit_tile).uploaded += ds_moved;
        moved += ds_moved;
      }
    }
    for (auto& [d, bytes] : evicted) {
      Command c;
      c.kind = CmdKind::d2h;
      c.queue = queue;
      c.bytes = bytes;
      c.dataset = d;
      c.tile = audit_tile;
      res.program.push(c);
      audit.at(d, audit_tile).downloaded += bytes;
    }
    return moved;
  };

  if (opts.prefetch) device_prefetch(0, pq, 0);

  for (int t = 0; t < plan.tile_count; ++t) {
    if (opts.prefetch) res.program.push_wait(kq, {t == 0 ? pq : iq});

    for (size_t j = 0; j < chain.loops.size(); ++j) {
      const ParLoop& loop = chain.loops[j];
      Extent sub = plan.subrange(static_cast<int>(j), t);
      if (sub.empty()) continue;

      // Faults serialise: each missing page stalls the kernel for the
      // fault latency plus its migration; evicted pages migrate back.
      double stall = 0.0;
      walk_access_segments(mesh, state.space, loop, sub,
                           [&](DatasetId, index_t b0, index_t b1, bool writes) {
                             for (index_t pg = b0 / page_bytes; pg <= (b1 - 1) / page_bytes; ++pg) {
                               bool hit = state.pager.touch(pg, writes, [&](index_t victim, bool) {
                                 stall += static_cast<double>(page_bytes) / cfg.d2h_bandwidth;
                                 audit.at(state.space.dataset_of_page(victim), t).downloaded +=
                                     page_bytes;
                               });
                               if (!hit) {
                                 ++res.faults;
                                 stall += cfg.fault_latency +
                                          static_cast<double>(page_bytes) / cfg.h2d_bandwidth;
                                 audit.at(state.space.dataset_of_page(pg), t).uploaded +=
                                     page_bytes;
                               }
                             }
                           });

      Command c;
      c.kind = CmdKind::kernel;
      c.queue = opts.prefetch ? kq : 0;
      c.bytes = sub.size() * loop_bytes_per_point(mesh, loop);
      c.tile = t;
      c.loop = loop.id;
      c.extra_seconds = stall;
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

    if (opts.prefetch) {
      // Retire this tile's exclusive pages on the kernel queue, pull the
      // next tile on the second queue, then hop to the idle queue.
      for (DatasetId d : used) {
        const Extent& region = fp.per_dataset[d].left_fp[t];
        index_t ds_moved = 0;
        for (index_t pg : region_pages(mesh, state.space, d, region))
          if (state.pager.drop(pg).first) ds_moved += page_bytes;
        if (ds_moved > 0) {
          Command c;
          c.kind = CmdKind::d2h;
          c.queue = kq;
          c.bytes = ds_moved;
          c.dataset = d;
          c.tile = t;
          c.prefetch_rate = true;
          res.program.push(c);
          audit.at(d, t).downloaded += ds_moved;
        }
      }
      if (t + 1 < plan.tile_count) device_prefetch(t + 1, pq, t + 1);
      int new_kq = iq, new_pq = kq, new_iq = pq;
      kq = new_kq;
      pq = new_pq;
      iq = new_iq;
    }
  }

  for (size_t j = 0; j < chain.loops.size(); ++j)
    if (chain.loops[j].has_reduction()) res.reductions[chain.loops[j].id] = red_acc[j];

  res.timeline = simulate_timeline(res.program, cfg, &state.queues);
  for (auto& [k, v] : audit.rows) {
    // Fault traffic is carried inside kernel stalls, not commands; fold it
    // into the totals so accounting reconciles with the audit rows.
    res.audit.push_back(v);
  }
  index_t audit_up = 0, audit_down = 0;
  for (const auto& r : res.audit) {
    audit_up += r.uploaded;
    audit_down += r.downloaded;
  }
  res.timeline.uploaded = audit_up;
  res.timeline.downloaded = audit_down;
  return res;
}

}  // namespace ooc
