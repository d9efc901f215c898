#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ooc/chain.hpp"
#include "ooc/dataset.hpp"

namespace ooc {

/// Skewed blocking of a chain along one dimension. Tile t of loop j covers
/// [ends[j][t-1], ends[j][t]) in the tiled dimension (ends[j][-1] is the
/// loop's range start) and the loop's full range in every other dimension.
/// Boundaries satisfy, for every earlier loop j and later loop k:
///   - ends[j][t] >= ends[k][t] + hi   when k reads what j writes with
///     positive extent hi (flow dependence),
///   - ends[j][t] >= ends[k][t] - lo   when k overwrites what j reads with
///     extent lo <= 0 (anti dependence),
///   - ends[j][t] >= ends[k][t]        when both write (output dependence),
/// so every tile only consumes values produced behind or inside itself.
struct TilePlan {
  int tiled_dim = 0;
  int tile_count = 1;
  std::vector<index_t> nominal_ends;          // e_0 < ... < e_{T-1}
  std::vector<Extent> loop_ranges;            // copy of each loop's range
  std::vector<std::vector<index_t>> ends;     // [loop][tile]
  std::vector<std::string> warnings;

  Extent subrange(int loop, int tile) const {
    index_t start = tile == 0 ? loop_ranges[loop].lo[tiled_dim] : ends[loop][tile - 1];
    index_t end = ends[loop][tile];
    Extent r = loop_ranges[loop].with_dim(tiled_dim, start, end);
    if (start >= end) return Extent::make(r.ndim, {0, 0, 0}, {0, 0, 0});
    return r;
  }
};

/// Per-dataset, per-tile data regions of a plan (Fig.-style tile regions):
/// `full` is everything tile t touches of the dataset, `left/right_edge`
/// the overlaps with the previous/next tile, and `left/right_fp` the full
/// footprint minus the right/left edge. All are boxes; the left footprints
/// of a dataset partition the union of its full footprints exactly.
struct Footprints {
  struct PerDataset {
    bool accessed = false;
    bool written_any = false;  // written somewhere in the chain
    bool write_first = false;  // chain never consumes the dataset's prior host values
    std::vector<Extent> full, left_edge, right_edge, left_fp, right_fp;
    std::vector<char> modified;  // per tile: some loop writes a non-empty sub-range
    index_t max_tile_bytes = 0;  // max_t elem_bytes * |full[t]|
  };
  std::vector<PerDataset> per_dataset;  // indexed by DatasetId
  index_t slot_bytes = 0;               // sum over datasets of max_tile_bytes
};

TilePlan compute_tile_plan(const Mesh& mesh, const LoopChain& chain, int tile_count,
                           int tiled_dim = 0);

Footprints compute_footprints(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan);

/// Simulates the tiled execution order over per-point last-writer maps and
/// reports the first read that would observe a different value than the
/// loop-ordered execution (unwritten or already-overwritten data), i.e. any
/// broken flow or anti dependence. Also verifies that each loop's
/// sub-ranges partition its range.
struct OracleResult {
  bool ok = true;
  int tile = -1;
  int loop = -1;
  std::string dataset;
  Point point{0, 0, 0};
  std::string message;
};

OracleResult dependency_oracle(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan);

/// Smallest tile count whose three-slot working set fits the budget.
struct TileChoice {
  int tile_count = 1;
  index_t slot_bytes = 0;  // per-slot working set actually achieved
  TilePlan plan;
  Footprints footprints;
};

TileChoice choose_tile_count(const Mesh& mesh, const LoopChain& chain, index_t budget_bytes,
                             int tiled_dim = 0);

/// Plans keyed by the structural shape of a chain (ranges, arguments,
/// stencils, access modes — kernel constants do not matter).
class PlanCache {
 public:
  struct Entry {
    TilePlan plan;
    Footprints footprints;
  };
  const Entry& get(const Mesh& mesh, const LoopChain& chain, int tile_count, int tiled_dim);
  size_t size() const { return cache_.size(); }
  size_t hits = 0, misses = 0;

 private:
  std::map<std::string, Entry> cache_;
};

std::string chain_structural_key(const Mesh& mesh, const LoopChain& chain);

/// Human-readable table of sub-ranges and footprint bytes.
std::string plan_dump_text(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                           const Footprints& fp);
/// Machine-readable mirror of plan_dump_text.
std::string plan_dump_json(const Mesh& mesh, const LoopChain& chain, const TilePlan& plan,
                           const Footprints& fp);

}  // namespace ooc
