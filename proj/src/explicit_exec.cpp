#include "ooc/explicit_exec.hpp"

#include <cassert>
#include <cstring>

#include "ooc/errors.hpp"

namespace ooc {

namespace {

/// Copies `region` between two row-major boxes that both contain it.
void copy_box(const double* src, const Extent& src_box, double* dst, const Extent& dst_box,
              const Extent& region) {
  if (region.empty()) return;
  assert(src_box.contains(region) && dst_box.contains(region));
  const int inner = region.ndim - 1;
  const index_t run = region.len(inner);
  Point p = region.lo;
  const index_t n0 = region.ndim >= 2 ? region.len(0) : 1;
  const index_t n1 = region.ndim == 3 ? region.len(1) : 1;
  for (index_t r0 = 0; r0 < n0; ++r0)
    for (index_t r1 = 0; r1 < n1; ++r1) {
      if (region.ndim >= 2) p[0] = region.lo[0] + r0;
      if (region.ndim == 3) p[1] = region.lo[1] + r1;
      p[inner] = region.lo[inner];
      std::memcpy(dst + dst_box.flatten(p), src + src_box.flatten(p),
                  static_cast<size_t>(run) * sizeof(double));
    }
}

struct Arena {
  Extent box;
  std::vector<double> data;
};

struct AuditMap {
  std::map<std::pair<DatasetId, int>, AuditRow> rows;
  AuditRow& at(DatasetId d, int tile) {
    AuditRow& r = rows[{d, tile}];
    r.dataset = d;
    r.tile = tile;
    return r;
  }
  std::vector<AuditRow> take() {
    std::vector<AuditRow> out;
    out.reserve(rows.size());
    for (auto& [k, v] : rows) out.push_back(v);
    return out;
  }
};

}  // namespace

ExecResult run_chain_explicit(Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                              const Footprints& fp, const DeviceConfig& cfg,
                              const ExecOptions& opts, DeviceState& state) {
  const int T = plan.tile_count;
  const int n_loops = static_cast<int>(chain.loops.size());

  if (3 * fp.slot_bytes > cfg.capacity_bytes)
    throw CapacityError(3 * fp.slot_bytes, cfg.capacity_bytes);

  ExecResult res;
  res.program = CommandQueueProgram(&state.queues);
  CommandQueueProgram& prog = res.program;
  AuditMap audit;

  std::vector<DatasetId> used;
  for (size_t d = 0; d < fp.per_dataset.size(); ++d)
    if (fp.per_dataset[d].accessed) used.push_back(static_cast<DatasetId>(d));

  // Three per-dataset arenas; slot s(t) hosts tile t.
  std::vector<std::array<Arena, 3>> arenas(mesh.datasets.size());
  auto slot_of = [&](int tile) { return (state.slot_cursor + tile) % 3; };
  auto arena_of = [&](DatasetId d, int tile) -> Arena& { return arenas[d][slot_of(tile)]; };

  auto set_tile_boxes = [&](int tile) {
    for (DatasetId d : used) {
      Arena& a = arena_of(d, tile);
      a.box = fp.per_dataset[d].full[tile];
      a.data.assign(static_cast<size_t>(a.box.size()), 0.0);
    }
  };

  auto needs_upload = [&](DatasetId d) { return !fp.per_dataset[d].write_first; };

  auto push_upload = [&](DatasetId d, const Extent& region, int tile, int queue,
                         int audit_tile) {
    if (region.empty()) return;
    Command c;
    c.kind = CmdKind::h2d;
    c.queue = queue;
    c.bytes = region.size() * mesh[d].elem_bytes;
    c.dataset = d;
    c.tile = audit_tile;
    prog.push(c);
    Arena& a = arena_of(d, tile);
    copy_box(mesh[d].host.data(), mesh[d].alloc(), a.data.data(), a.box, region);
    audit.at(d, audit_tile).uploaded += c.bytes;
  };

  auto push_download = [&](DatasetId d, const Extent& region, int tile) {
    if (region.empty()) return;
    Command c;
    c.kind = CmdKind::d2h;
    c.queue = 2;
    c.bytes = region.size() * mesh[d].elem_bytes;
    c.dataset = d;
    c.tile = tile;
    prog.push(c);
    Arena& a = arena_of(d, tile);
    copy_box(a.data.data(), a.box, mesh[d].host.data(), mesh[d].alloc(), region);
    audit.at(d, tile).downloaded += c.bytes;
  };

  auto push_d2d = [&](DatasetId d, const Extent& region, int from_tile, int to_tile) {
    if (region.empty()) return;
    Command c;
    c.kind = CmdKind::d2d;
    c.queue = 0;
    c.bytes = region.size() * mesh[d].elem_bytes;
    c.dataset = d;
    c.tile = to_tile;
    prog.push(c);
    Arena& src = arena_of(d, from_tile);
    Arena& dst = arena_of(d, to_tile);
    copy_box(src.data.data(), src.box, dst.data.data(), dst.box, region);
    audit.at(d, to_tile).d2d += c.bytes;
  };

  // Tile-0 upload of one dataset, consuming whatever the previous chain
  // staged speculatively: overlapping data is already resident, only the
  // missing slabs along the tiled dimension travel.
  auto upload_tile0 = [&](DatasetId d, const Extent& region) {
    if (region.empty()) return;
    auto it = state.staged.find(d);
    if (it != state.staged.end()) {
      Extent common = region.intersect(it->second.region);
      bool splits_on_tiled_dim = !common.empty();
      for (int dim = 0; dim < 3 && splits_on_tiled_dim; ++dim)
        if (dim != plan.tiled_dim && (common.lo[dim] != region.lo[dim] ||
                                      common.hi[dim] != region.hi[dim]))
          splits_on_tiled_dim = false;
      if (splits_on_tiled_dim) {
        Arena& a = arena_of(d, 0);
        copy_box(it->second.data.data(), it->second.region, a.data.data(), a.box, common);
        const int dim = plan.tiled_dim;
        if (region.lo[dim] < common.lo[dim])
          push_upload(d, region.with_dim(dim, region.lo[dim], common.lo[dim]), 0, 0, 0);
        if (common.hi[dim] < region.hi[dim])
          push_upload(d, region.with_dim(dim, common.hi[dim], region.hi[dim]), 0, 0, 0);
        return;
      }
    }
    push_upload(d, region, 0, 0, 0);
  };

  // Reductions fold across tiles in tile order, which concatenates to
  // row-major order over each loop's full range.
  std::vector<double> red_acc(n_loops);
  for (int j = 0; j < n_loops; ++j) red_acc[j] = reduce_identity(chain.loops[j].kernel.reduce);

  std::vector<Extent> downloaded_hull(mesh.datasets.size());
  std::vector<Extent> skipped_hull(mesh.datasets.size());
  for (DatasetId d : used) {
    downloaded_hull[d] = Extent::none(mesh[d].alloc().ndim);
    skipped_hull[d] = Extent::none(mesh[d].alloc().ndim);
  }

  int speculative_mark = -1;  // program position where staged uploads were issued

  for (int t = 0; t < T; ++t) {
    if (t == 0) {
      set_tile_boxes(0);
      for (DatasetId d : used)
        if (needs_upload(d)) upload_tile0(d, fp.per_dataset[d].full[0]);
      state.staged.clear();  // anything not consumed is for a chain that never came
    }

    prog.push_wait(1, {0});
    if (t + 1 < T) {
      set_tile_boxes(t + 1);
      for (DatasetId d : used)
        if (needs_upload(d)) push_upload(d, fp.per_dataset[d].right_fp[t + 1], t + 1, 1, t + 1);
    }

    if (opts.prefetch && t == T - 1) {
      // Stage the next chain's presumed first tile while this tile's
      // kernels run; the wait pins the start to the kernels' start.
      prog.push_wait(1, {0});
      speculative_mark = static_cast<int>(prog.commands.size());
      for (DatasetId d : used) {
        if (!needs_upload(d) || fp.per_dataset[d].full[0].empty()) continue;
        Command c;
        c.kind = CmdKind::h2d;
        c.queue = 1;
        c.bytes = fp.per_dataset[d].full[0].size() * mesh[d].elem_bytes;
        c.dataset = d;
        c.tile = T;
        prog.push(c);
        audit.at(d, T).uploaded += c.bytes;
      }
    }

    for (int j = 0; j < n_loops; ++j) {
      const ParLoop& loop = chain.loops[j];
      Extent sub = plan.subrange(j, t);
      if (sub.empty()) continue;
      Command c;
      c.kind = CmdKind::kernel;
      c.queue = 0;
      c.bytes = sub.size() * loop_bytes_per_point(mesh, loop);
      c.tile = t;
      c.loop = loop.id;
      prog.push(c);

      std::vector<ArgView> views;
      views.reserve(loop.args.size());
      for (const auto& a : loop.args) {
        Arena& ar = arena_of(a.dataset, t);
        views.push_back({ar.data.data(), ar.box});
        if (access_writes(a.mode)) mesh[a.dataset].ever_written = true;
      }
      apply_loop(loop, sub, views, opts.policy, loop.has_reduction() ? &red_acc[j] : nullptr);
    }

    prog.push_wait(0, {2});
    prog.push_wait(2, {0});
    if (t + 1 < T)
      for (DatasetId d : used) push_d2d(d, fp.per_dataset[d].right_edge[t], t, t + 1);

    for (DatasetId d : used) {
      const auto& pd = fp.per_dataset[d];
      if (!pd.written_any) continue;  // read-only data never travels back
      if (opts.cyclic && pd.write_first) {
        skipped_hull[d] = skipped_hull[d].hull(pd.left_fp[t]);
        continue;
      }
      push_download(d, pd.left_fp[t], t);
      downloaded_hull[d] = downloaded_hull[d].hull(pd.left_fp[t]);
    }
  }

  // Host staleness bookkeeping for the cyclic optimisation.
  for (DatasetId d : used) {
    Dataset& ds = mesh[d];
    if (!skipped_hull[d].empty()) {
      ds.stale_region = ds.host_stale ? ds.stale_region.hull(skipped_hull[d]) : skipped_hull[d];
      ds.host_stale = true;
      ds.stale_chain = chain.chain_id;
    } else if (ds.host_stale && !downloaded_hull[d].empty() &&
               downloaded_hull[d].contains(ds.stale_region)) {
      ds.host_stale = false;
      ds.stale_chain = -1;
      ds.stale_region = Extent::none(ds.alloc().ndim);
    }
  }

  // Snapshot the staged uploads once every download has landed: the staged
  // bytes then equal the host values the next chain will start from.
  if (speculative_mark >= 0) {
    for (DatasetId d : used) {
      if (!needs_upload(d) || fp.per_dataset[d].full[0].empty()) continue;
      DeviceState::Staged st;
      st.region = fp.per_dataset[d].full[0];
      st.data.resize(static_cast<size_t>(st.region.size()));
      copy_box(mesh[d].host.data(), mesh[d].alloc(), st.data.data(), st.region, st.region);
      state.staged[d] = std::move(st);
    }
  }

  state.slot_cursor = (state.slot_cursor + T) % 3;

  for (int j = 0; j < n_loops; ++j)
    if (chain.loops[j].has_reduction()) res.reductions[chain.loops[j].id] = red_acc[j];

  res.audit = audit.take();
  res.timeline = simulate_timeline(prog, cfg, &state.queues);
  return res;
}

}  // namespace ooc
