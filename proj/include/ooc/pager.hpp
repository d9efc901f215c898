#pragma once

#include <functional>
#include <list>
#include <unordered_map>
#include <vector>

#include "ooc/dataset.hpp"
#include "ooc/loop.hpp"

namespace ooc {

/// Linear byte layout of all datasets, with page-aligned bases so a page
/// always belongs to one dataset. Sizes use each dataset's elem_bytes, the
/// same convention as every other byte count in the simulator.
struct PageSpace {
  index_t page_bytes = 65536;
  std::vector<index_t> base;  // per dataset, byte offset
  index_t total_bytes = 0;

  void build(const Mesh& mesh, index_t page_size) {
    page_bytes = page_size;
    base.clear();
    index_t off = 0;
    for (const auto& ds : mesh.datasets) {
      base.push_back(off);
      index_t sz = ds.alloc().size() * ds.elem_bytes;
      off += (sz + page_bytes - 1) / page_bytes * page_bytes;
    }
    total_bytes = off;
  }

  DatasetId dataset_of_page(index_t page) const {
    index_t byte = page * page_bytes;
    DatasetId d = static_cast<DatasetId>(base.size()) - 1;
    while (d > 0 && base[d] > byte) --d;
    return d;
  }

  /// Byte range of a contiguous element run inside a dataset's allocation.
  std::pair<index_t, index_t> element_run(const Mesh& mesh, DatasetId d, index_t first_elem,
                                          index_t n_elems) const {
    index_t b0 = base[d] + first_elem * mesh[d].elem_bytes;
    return {b0, b0 + n_elems * mesh[d].elem_bytes};
  }
};

/// Fully associative LRU over pages with dirty tracking.
class LruPager {
 public:
  struct Stats {
    index_t hits = 0, misses = 0, evictions = 0, dirty_evictions = 0;
  };

  /// fn(page, evicted_dirty) is called for each eviction.
  using EvictFn = std::function<void(index_t, bool)>;

  void reset(index_t capacity_pages) {
    cap_ = std::max<index_t>(capacity_pages, 1);
    lru_.clear();
    map_.clear();
    stats_ = {};
  }

  bool resident(index_t page) const { return map_.count(page) != 0; }
  index_t resident_pages() const { return static_cast<index_t>(map_.size()); }
  const Stats& stats() const { return stats_; }

  /// Access one page; inserts it (evicting LRU pages) when missing.
  /// Returns true on hit.
  bool touch(index_t page, bool dirty, const EvictFn& on_evict = nullptr) {
    auto it = map_.find(page);
    if (it != map_.end()) {
      ++stats_.hits;
      lru_.splice(lru_.begin(), lru_, it->second.pos);
      it->second.dirty |= dirty;
      return true;
    }
    ++stats_.misses;
    insert(page, dirty, on_evict);
    return false;
  }

  /// Make a page resident without access accounting (prefetch). Returns
  /// true when the page actually had to be brought in.
  bool admit(index_t page, const EvictFn& on_evict = nullptr) {
    auto it = map_.find(page);
    if (it != map_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.pos);
      return false;
    }
    insert(page, false, on_evict);
    return true;
  }

  /// Drop a page (prefetch to host). Returns {was_resident, was_dirty}.
  std::pair<bool, bool> drop(index_t page) {
    auto it = map_.find(page);
    if (it == map_.end()) return {false, false};
    bool dirty = it->second.dirty;
    lru_.erase(it->second.pos);
    map_.erase(it);
    return {true, dirty};
  }

 private:
  struct EntryInfo {
    std::list<index_t>::iterator pos;
    bool dirty;
  };

  void insert(index_t page, bool dirty, const EvictFn& on_evict) {
    while (static_cast<index_t>(map_.size()) >= cap_) {
      index_t victim = lru_.back();
      bool vdirty = map_[victim].dirty;
      lru_.pop_back();
      map_.erase(victim);
      ++stats_.evictions;
      if (vdirty) ++stats_.dirty_evictions;
      if (on_evict) on_evict(victim, vdirty);
    }
    lru_.push_front(page);
    map_[page] = {lru_.begin(), dirty};
  }

  index_t cap_ = 1;
  std::list<index_t> lru_;
  std::unordered_map<index_t, EntryInfo> map_;
  Stats stats_;
};

/// Visits, per row of `sub` and per argument, the contiguous byte segments
/// the argument accesses (one per distinct outer-offset pair of its
/// stencil, spanning the inner extent of the stencil).
/// fn(dataset, byte_lo, byte_hi, writes)
void walk_access_segments(const Mesh& mesh, const PageSpace& space, const ParLoop& loop,
                          const Extent& sub,
                          const std::function<void(DatasetId, index_t, index_t, bool)>& fn);

}  // namespace ooc
