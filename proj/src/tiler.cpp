#include "ooc/tiler.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <sstream>

#include "ooc/errors.hpp"

#include "json.hpp"

namespace ooc {

namespace {

constexpr index_t kNoReq = std::numeric_limits<index_t>::min();

/// Extent bounds of one loop's accesses to a dataset along `dim`:
/// writes contribute 0, reads their stencil extents.
struct AccessExtent {
  bool reads = false, writes = false;
  index_t read_lo = 0, read_hi = 0;  // min/max stencil extent over read args
};

AccessExtent access_extent(const ParLoop& loop, DatasetId d, int dim) {
  AccessExtent ae;
  for (const auto& a : loop.args) {
    if (a.dataset != d) continue;
    if (access_writes(a.mode)) ae.writes = true;
    if (access_reads(a.mode)) {
      auto [lo, hi] = stencil_extents(a.stencil);
      if (!ae.reads) {
        ae.read_lo = lo[dim];
        ae.read_hi = hi[dim];
      } else {
        ae.read_lo = std::min(ae.read_lo, lo[dim]);
        ae.read_hi = std::max(ae.read_hi, hi[dim]);
      }
      ae.reads = true;
    }
  }
  return ae;
}

std::vector<DatasetId> chain_datasets(const Mesh& mesh, const LoopChain& chain) {
  std::vector<char> used(mesh.datasets.size(), 0);
  for (const auto& l : chain.loops)
    for (const auto& a : l.args) used[a.dataset] = 1;
  std::vector<DatasetId> ids;
  for (size_t i = 0; i < used.size(); ++i)
    if (used[i]) ids.push_back(static_cast<DatasetId>(i));
  return ids;
}

/// True when the union of two boxes is itself a box.
bool union_is_box(const Extent& a, const Extent& b) {
  if (a.contains(b) || b.contains(a)) return true;
  int odd_dim = -1;
  for (int d = 0; d < 3; ++d) {
    if (a.lo[d] == b.lo[d] && a.hi[d] == b.hi[d]) continue;
    if (odd_dim >= 0) return false;
    odd_dim = d;
  }
  if (odd_dim < 0) return true;
  return std::max(a.lo[odd_dim], b.lo[odd_dim]) <= std::min(a.hi[odd_dim], b.hi[odd_dim]);
}

}  // namespace

TilePlan compute_tile_plan(const Mesh& mesh, const LoopChain& chain, int tile_count,
                           int tiled_dim) {
  if (chain.loops.empty()) throw ValidationError("cannot tile an empty chain");
  if (tile_count < 1) throw ValidationError("tile count must be at least 1");
  const int ndim = chain.loops.front().range.ndim;
  if (tiled_dim < 0 || tiled_dim >= ndim) throw ValidationError("tiled dimension out of range");

  TilePlan plan;
  plan.tiled_dim = tiled_dim;

  index_t lo = std::numeric_limits<index_t>::max();
  index_t hi = std::numeric_limits<index_t>::min();
  for (const auto& l : chain.loops) {
    lo = std::min(lo, l.range.lo[tiled_dim]);
    hi = std::max(hi, l.range.hi[tiled_dim]);
    plan.loop_ranges.push_back(l.range);
  }
  const index_t extent = hi - lo;
  if (tile_count > extent) {
    plan.warnings.push_back("tile count " + std::to_string(tile_count) +
                            " exceeds tiled extent " + std::to_string(extent) + "; reduced");
    tile_count = static_cast<int>(extent);
  }
  plan.tile_count = tile_count;
  for (int t = 0; t < tile_count; ++t)
    plan.nominal_ends.push_back(lo + ((t + 1) * extent) / tile_count);

  const int n_loops = static_cast<int>(chain.loops.size());
  plan.ends.assign(n_loops, std::vector<index_t>(tile_count, 0));

  // Per tile, sweep loops in reverse carrying per-dataset requirements:
  //   read_req[d]  — furthest exclusive index some later loop reads
  //   write_req[d] — furthest exclusive index some later loop writes
  // A loop's boundary must reach every requirement its writes must satisfy
  // (flow, output) and stay ahead of later writers of what it reads (anti).
  std::vector<index_t> read_req(mesh.datasets.size());
  std::vector<index_t> write_req(mesh.datasets.size());
  for (int t = 0; t < tile_count; ++t) {
    std::fill(read_req.begin(), read_req.end(), kNoReq);
    std::fill(write_req.begin(), write_req.end(), kNoReq);
    for (int j = n_loops - 1; j >= 0; --j) {
      const ParLoop& loop = chain.loops[j];
      index_t d = plan.nominal_ends[t];
      for (const auto& a : loop.args) {
        AccessExtent ae = access_extent(loop, a.dataset, tiled_dim);
        if (access_writes(a.mode)) {
          if (read_req[a.dataset] != kNoReq) d = std::max(d, read_req[a.dataset]);
          if (write_req[a.dataset] != kNoReq) d = std::max(d, write_req[a.dataset]);
        }
        if (access_reads(a.mode) && write_req[a.dataset] != kNoReq)
          d = std::max(d, write_req[a.dataset] - ae.read_lo);
      }
      d = std::clamp(d, loop.range.lo[tiled_dim], loop.range.hi[tiled_dim]);
      if (t == tile_count - 1) d = loop.range.hi[tiled_dim];
      if (t > 0) d = std::max(d, plan.ends[j][t - 1]);
      plan.ends[j][t] = d;

      for (const auto& a : loop.args) {
        AccessExtent ae = access_extent(loop, a.dataset, tiled_dim);
        if (access_reads(a.mode))
          read_req[a.dataset] = std::max(read_req[a.dataset], d + ae.read_hi);
        if (access_writes(a.mode)) write_req[a.dataset] = std::max(write_req[a.dataset], d);
      }
    }
  }
  return plan;
}

Footprints compute_footprints(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan) {
  Footprints fp;
  fp.per_dataset.resize(mesh.datasets.size());
  const int T = plan.tile_count;
  const int dim = plan.tiled_dim;
  const int n_loops = static_cast<int>(chain.loops.size());

  for (DatasetId d : chain_datasets(mesh, chain)) {
    auto& pd = fp.per_dataset[d];
    pd.accessed = true;
    const Extent alloc = mesh[d].alloc();
    const Extent empty = Extent::none(alloc.ndim);
    pd.full.assign(T, empty);
    pd.left_edge.assign(T, empty);
    pd.right_edge.assign(T, empty);
    pd.left_fp.assign(T, empty);
    pd.right_fp.assign(T, empty);
    pd.modified.assign(T, 0);

    // Non-tiled extent is taken from the full loop ranges so it is uniform
    // over tiles; only the tiled interval varies.
    Extent base;  // hull over loops of expanded full ranges, clamped
    bool base_set = false;
    for (int j = 0; j < n_loops; ++j) {
      const ParLoop& loop = chain.loops[j];
      bool uses = false;
      Point elo{0, 0, 0}, ehi{0, 0, 0};
      for (const auto& a : loop.args) {
        if (a.dataset != d) continue;
        uses = true;
        if (access_reads(a.mode)) {
          auto [slo, shi] = stencil_extents(a.stencil);
          for (int k = 0; k < 3; ++k) {
            elo[k] = std::min(elo[k], slo[k]);
            ehi[k] = std::max(ehi[k], shi[k]);
          }
        }
      }
      if (!uses) continue;
      Extent reach = loop.range.expand(elo, ehi).intersect(alloc);
      base = base_set ? base.hull(reach) : reach;
      base_set = true;
    }

    // Tiled-dim interval per tile from the non-empty sub-ranges.
    std::vector<index_t> a_t(T, std::numeric_limits<index_t>::max());
    std::vector<index_t> b_t(T, std::numeric_limits<index_t>::min());
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < n_loops; ++j) {
        const ParLoop& loop = chain.loops[j];
        AccessExtent ae = access_extent(loop, d, dim);
        if (!ae.reads && !ae.writes) continue;
        Extent sub = plan.subrange(j, t);
        if (sub.empty()) continue;
        index_t rlo = ae.reads ? std::min<index_t>(0, ae.read_lo) : 0;
        index_t rhi = ae.reads ? std::max<index_t>(0, ae.read_hi) : 0;
        a_t[t] = std::min(a_t[t], sub.lo[dim] + rlo);
        b_t[t] = std::max(b_t[t], sub.hi[dim] + rhi);
        if (ae.writes) pd.modified[t] = 1;
      }
      a_t[t] = std::max(a_t[t], alloc.lo[dim]);
      b_t[t] = std::min(b_t[t], alloc.hi[dim]);
    }

    // Normalise to monotone intervals so edges and footprints are single
    // boxes; widening only ever grows a footprint (over-transfer is
    // measured, never hidden).
    auto nonempty = [&](int t) { return a_t[t] < b_t[t]; };
    int prev = -1;
    for (int t = 0; t < T; ++t) {
      if (!nonempty(t)) continue;
      if (prev >= 0) b_t[t] = std::max(b_t[t], b_t[prev]);
      prev = t;
    }
    int next = -1;
    for (int t = T - 1; t >= 0; --t) {
      if (!nonempty(t)) continue;
      if (next >= 0) a_t[t] = std::min(a_t[t], a_t[next]);
      next = t;
    }
    // Idle tiles between two active ones carry the overlap through the
    // edge chain so every byte still travels home exactly once.
    prev = -1;
    for (int t = 0; t < T; ++t) {
      if (!nonempty(t)) continue;
      if (prev >= 0 && t > prev + 1 && a_t[t] < b_t[prev])
        for (int g = prev + 1; g < t; ++g) {
          a_t[g] = a_t[t];
          b_t[g] = b_t[prev];
        }
      prev = t;
    }

    for (int t = 0; t < T; ++t) {
      if (a_t[t] >= b_t[t]) continue;  // dataset untouched by this tile
      pd.full[t] = base.with_dim(dim, a_t[t], b_t[t]);
      pd.max_tile_bytes = std::max(pd.max_tile_bytes, pd.full[t].size() * mesh[d].elem_bytes);
      if (pd.modified[t]) pd.written_any = true;
    }
    for (int t = 0; t < T; ++t) {
      const Extent& full = pd.full[t];
      if (full.empty()) continue;
      if (t > 0 && !pd.full[t - 1].empty()) pd.left_edge[t] = full.intersect(pd.full[t - 1]);
      if (t + 1 < T && !pd.full[t + 1].empty()) pd.right_edge[t] = full.intersect(pd.full[t + 1]);
      pd.left_fp[t] = pd.right_edge[t].empty()
                          ? full
                          : full.with_dim(dim, full.lo[dim], pd.right_edge[t].lo[dim]);
      pd.right_fp[t] = pd.left_edge[t].empty()
                           ? full
                           : full.with_dim(dim, pd.left_edge[t].hi[dim], full.hi[dim]);
      if (pd.left_fp[t].lo[dim] >= pd.left_fp[t].hi[dim]) pd.left_fp[t] = Extent::none(full.ndim);
      if (pd.right_fp[t].lo[dim] >= pd.right_fp[t].hi[dim])
        pd.right_fp[t] = Extent::none(full.ndim);
    }
    fp.slot_bytes += pd.max_tile_bytes;
  }

  // Write-first qualification: the chain must never consume the dataset's
  // prior host contents — every read must land inside the already-written
  // region and every per-tile footprint must end up written. Tracked as a
  // box union kept exact while it stays a box; anything irregular
  // disqualifies (upload is then kept, which is always safe).
  for (DatasetId d : chain_datasets(mesh, chain)) {
    auto& pd = fp.per_dataset[d];
    Extent written;
    bool written_set = false, exact = true, reads_prior = false;
    for (const auto& loop : chain.loops) {
      for (const auto& a : loop.args) {
        if (a.dataset != d) continue;
        if (access_reads(a.mode)) {
          auto [slo, shi] = stencil_extents(a.stencil);
          Extent reach = loop.range.expand(slo, shi);
          if (!written_set || !exact || !written.contains(reach)) reads_prior = true;
        }
        if (access_writes(a.mode)) {
          if (!written_set) {
            written = loop.range;
            written_set = true;
          } else if (written.contains(loop.range)) {
            // no change
          } else if (union_is_box(written, loop.range)) {
            written = written.hull(loop.range);
          } else {
            written = written.hull(loop.range);
            exact = false;
          }
        }
      }
    }
    bool covered = written_set && exact;
    if (covered)
      for (int t = 0; t < T && covered; ++t)
        if (!pd.full[t].empty() && !written.contains(pd.full[t])) covered = false;
    pd.write_first = !reads_prior && covered;
  }
  return fp;
}

OracleResult dependency_oracle(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan) {
  OracleResult res;
  const int n_loops = static_cast<int>(chain.loops.size());

  // Sub-ranges of each loop must partition its range.
  for (int j = 0; j < n_loops; ++j) {
    index_t covered = 0;
    index_t prev = plan.loop_ranges[j].lo[plan.tiled_dim];
    for (int t = 0; t < plan.tile_count; ++t) {
      index_t end = plan.ends[j][t];
      if (end < prev) {
        res.ok = false;
        res.tile = t;
        res.loop = chain.loops[j].id;
        res.message = "loop boundaries are not non-decreasing";
        return res;
      }
      covered += end - prev;
      prev = end;
    }
    if (prev != plan.loop_ranges[j].hi[plan.tiled_dim] ||
        covered != plan.loop_ranges[j].len(plan.tiled_dim)) {
      res.ok = false;
      res.loop = chain.loops[j].id;
      res.message = "sub-ranges do not cover the loop range exactly once";
      return res;
    }
  }

  // Last writer per point, simulated in tiled order; a read must observe
  // the same writer the loop-ordered execution would (or initial data).
  std::vector<std::vector<int>> last_writer(mesh.datasets.size());
  for (DatasetId d : chain_datasets(mesh, chain))
    last_writer[d].assign(static_cast<size_t>(mesh[d].alloc().size()), -1);

  auto serial_writer_before = [&](int j, DatasetId d, const Point& p) {
    int w = -1;
    for (int i = 0; i < j; ++i)
      if (chain.loops[i].writes_dataset(d) && chain.loops[i].range.contains(p)) w = i;
    return w;
  };

  for (int t = 0; t < plan.tile_count; ++t) {
    for (int j = 0; j < n_loops; ++j) {
      const ParLoop& loop = chain.loops[j];
      Extent sub = plan.subrange(j, t);
      if (sub.empty()) continue;
      for (const auto& a : loop.args) {
        if (!access_reads(a.mode)) continue;
        const Extent alloc = mesh[a.dataset].alloc();
        auto& lw = last_writer[a.dataset];
        Point p;
        for (p[0] = sub.lo[0]; p[0] < sub.hi[0]; ++p[0])
          for (p[1] = sub.lo[1]; p[1] < sub.hi[1]; ++p[1])
            for (p[2] = sub.lo[2]; p[2] < sub.hi[2]; ++p[2])
              for (const auto& off : a.stencil.offsets) {
                Point q{p[0] + off[0], p[1] + off[1], p[2] + off[2]};
                int actual = lw[alloc.flatten(q)];
                int expected = serial_writer_before(j, a.dataset, q);
                if (actual != expected) {
                  res.ok = false;
                  res.tile = t;
                  res.loop = loop.id;
                  res.dataset = mesh[a.dataset].name;
                  res.point = q;
                  res.message =
                      actual < expected
                          ? "read of a point not yet written by loop " + std::to_string(expected)
                          : "read of a point already overwritten by loop " + std::to_string(actual);
                  return res;
                }
              }
      }
      for (const auto& a : loop.args) {
        if (!access_writes(a.mode)) continue;
        const Extent alloc = mesh[a.dataset].alloc();
        auto& lw = last_writer[a.dataset];
        Point p;
        for (p[0] = sub.lo[0]; p[0] < sub.hi[0]; ++p[0])
          for (p[1] = sub.lo[1]; p[1] < sub.hi[1]; ++p[1])
            for (p[2] = sub.lo[2]; p[2] < sub.hi[2]; ++p[2]) lw[alloc.flatten(p)] = j;
      }
    }
  }
  return res;
}

TileChoice choose_tile_count(const Mesh& mesh, const LoopChain& chain, index_t budget_bytes,
                             int tiled_dim) {
  if (budget_bytes <= 0) throw ValidationError("tile budget must be positive");
  index_t lo = std::numeric_limits<index_t>::max();
  index_t hi = std::numeric_limits<index_t>::min();
  for (const auto& l : chain.loops) {
    lo = std::min(lo, l.range.lo[tiled_dim]);
    hi = std::max(hi, l.range.hi[tiled_dim]);
  }
  const int max_tiles = static_cast<int>(hi - lo);
  index_t min_seen = std::numeric_limits<index_t>::max();
  for (int T = 1; T <= max_tiles; ++T) {
    TilePlan plan = compute_tile_plan(mesh, chain, T, tiled_dim);
    Footprints fp = compute_footprints(mesh, chain, plan);
    min_seen = std::min(min_seen, 3 * fp.slot_bytes);
    if (3 * fp.slot_bytes <= budget_bytes)
      return {plan.tile_count, fp.slot_bytes, std::move(plan), std::move(fp)};
  }
  throw InfeasibleError(min_seen, budget_bytes);
}

std::string chain_structural_key(const Mesh& mesh, const LoopChain& chain) {
  std::ostringstream os;
  for (const auto& l : chain.loops) {
    os << "L" << l.range.ndim;
    for (int d = 0; d < 3; ++d) os << "," << l.range.lo[d] << "," << l.range.hi[d];
    for (const auto& a : l.args) {
      os << ";" << a.dataset << ":" << static_cast<int>(a.mode) << ":";
      for (const auto& o : a.stencil.offsets) os << o[0] << "." << o[1] << "." << o[2] << " ";
      os << "@" << mesh[a.dataset].alloc().str();
    }
    os << "|";
  }
  return os.str();
}

const PlanCache::Entry& PlanCache::get(const Mesh& mesh, const LoopChain& chain, int tile_count,
                                       int tiled_dim) {
  std::string key = std::to_string(tile_count) + "/" + std::to_string(tiled_dim) + "/" +
                    chain_structural_key(mesh, chain);
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    ++hits;
    return it->second;
  }
  ++misses;
  Entry e;
  e.plan = compute_tile_plan(mesh, chain, tile_count, tiled_dim);
  e.footprints = compute_footprints(mesh, chain, e.plan);
  return cache_.emplace(std::move(key), std::move(e)).first->second;
}

std::string plan_dump_text(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                           const Footprints& fp) {
  std::ostringstream os;
  os << "tiled_dim=" << plan.tiled_dim << " tiles=" << plan.tile_count
     << " slot_bytes=" << fp.slot_bytes << "\n";
  for (int t = 0; t < plan.tile_count; ++t) {
    os << "tile " << t << "\n";
    for (size_t j = 0; j < chain.loops.size(); ++j)
      os << "  loop " << chain.loops[j].id << " range "
         << plan.subrange(static_cast<int>(j), t).str() << "\n";
    for (size_t d = 0; d < fp.per_dataset.size(); ++d) {
      const auto& pd = fp.per_dataset[d];
      if (!pd.accessed || pd.full[t].empty()) continue;
      os << "  dataset " << mesh[static_cast<DatasetId>(d)].name << " full " << pd.full[t].str()
         << " bytes " << pd.full[t].size() * mesh[static_cast<DatasetId>(d)].elem_bytes
         << (pd.modified[t] ? " modified" : "") << "\n";
    }
  }
  return os.str();
}

std::string plan_dump_json(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                           const Footprints& fp) {
  nlohmann::json j;
  j["tiled_dim"] = plan.tiled_dim;
  j["tiles"] = plan.tile_count;
  j["slot_bytes"] = fp.slot_bytes;
  j["nominal_ends"] = plan.nominal_ends;
  auto extent_json = [](const Extent& e) {
    nlohmann::json je;
    for (int d = 0; d < e.ndim; ++d) {
      je["lo"].push_back(e.lo[d]);
      je["hi"].push_back(e.hi[d]);
    }
    return je;
  };
  for (int t = 0; t < plan.tile_count; ++t) {
    nlohmann::json jt;
    jt["tile"] = t;
    for (size_t l = 0; l < chain.loops.size(); ++l) {
      nlohmann::json jl;
      jl["loop"] = chain.loops[l].id;
      Extent sub = plan.subrange(static_cast<int>(l), t);
      jl["empty"] = sub.empty();
      if (!sub.empty()) jl["range"] = extent_json(sub);
      jt["loops"].push_back(jl);
    }
    for (size_t d = 0; d < fp.per_dataset.size(); ++d) {
      const auto& pd = fp.per_dataset[d];
      if (!pd.accessed || pd.full[t].empty()) continue;
      nlohmann::json jd;
      jd["dataset"] = mesh[static_cast<DatasetId>(d)].name;
      jd["full"] = extent_json(pd.full[t]);
      jd["bytes"] = pd.full[t].size() * mesh[static_cast<DatasetId>(d)].elem_bytes;
      jd["modified"] = static_cast<bool>(pd.modified[t]);
      jt["datasets"].push_back(jd);
    }
    j["tiles_detail"].push_back(jt);
  }
  return j.dump(2);
}

}  // namespace ooc
