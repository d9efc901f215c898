#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ooc/errors.hpp"
#include "ooc/extent.hpp"

namespace ooc {

using DatasetId = int;

struct Block {
  std::string name;
  int ndim = 0;  // fixed by the first dataset declared on it
};

/// Named grid variable: a core extent surrounded by a per-dimension halo,
/// stored row-major as 64-bit floats. `elem_bytes` is carried for byte
/// accounting; storage itself is always double precision.
struct Dataset {
  std::string name;
  int block = 0;
  Extent core;
  Point halo{0, 0, 0};
  index_t elem_bytes = 8;
  std::vector<double> host;

  bool host_stale = false;
  int stale_chain = -1;      // chain that discarded the values
  Extent stale_region = {};  // tracked so a later covering download clears the flag
  bool ever_written = false;

  /// Allocation box: core expanded by the halo on every side.
  Extent alloc() const {
    Extent a = core;
    for (int d = 0; d < a.ndim; ++d) {
      a.lo[d] -= halo[d];
      a.hi[d] += halo[d];
    }
    return a;
  }

  double& at(const Point& p) { return host[alloc().flatten(p)]; }
  double at(const Point& p) const { return host[alloc().flatten(p)]; }
};

/// Owns the blocks and datasets of one program.
struct Mesh {
  std::vector<Block> blocks{{"block", 0}};
  std::vector<Dataset> datasets;

  DatasetId find(const std::string& name) const {
    for (size_t i = 0; i < datasets.size(); ++i)
      if (datasets[i].name == name) return static_cast<DatasetId>(i);
    return -1;
  }

  Dataset& operator[](DatasetId id) { return datasets[id]; }
  const Dataset& operator[](DatasetId id) const { return datasets[id]; }
};

/// Allocate, fill and register a dataset. The fill function receives the
/// global index of each element (halo included).
DatasetId declare_dataset(Mesh& mesh, const std::string& name, const Extent& core, Point halo,
                          index_t elem_bytes, const std::function<double(Point)>& fill);

inline DatasetId declare_dataset(Mesh& mesh, const std::string& name, const Extent& core,
                                 Point halo, index_t elem_bytes, double fill_value) {
  return declare_dataset(mesh, name, core, halo, elem_bytes,
                         [fill_value](Point) { return fill_value; });
}

}  // namespace ooc
