#include "ooc/dataset.hpp"

namespace ooc {

DatasetId declare_dataset(Mesh& mesh, const std::string& name, const Extent& core, Point halo,
                          index_t elem_bytes, const std::function<double(Point)>& fill) {
  if (mesh.find(name) >= 0) throw ValidationError("duplicate dataset name '" + name + "'");
  if (core.empty()) throw ValidationError("dataset '" + name + "' has a zero-size core extent");
  if (core.ndim < 1 || core.ndim > 3)
    throw ValidationError("dataset '" + name + "' has unsupported rank");
  Block& block = mesh.blocks[0];
  if (block.ndim == 0)
    block.ndim = core.ndim;
  else if (block.ndim != core.ndim)
    throw ValidationError("dataset '" + name + "' has rank " + std::to_string(core.ndim) +
                          " but its block has rank " + std::to_string(block.ndim));
  for (int d = 0; d < core.ndim; ++d)
    if (halo[d] < 0) throw ValidationError("dataset '" + name + "' has a negative halo depth");
  for (int d = core.ndim; d < 3; ++d) halo[d] = 0;
  if (elem_bytes <= 0) throw ValidationError("dataset '" + name + "' has non-positive elem_bytes");

  Dataset ds;
  ds.name = name;
  ds.core = core;
  ds.halo = halo;
  ds.elem_bytes = elem_bytes;
  ds.stale_region = Extent::make(core.ndim, {0, 0, 0}, {0, 0, 0});

  Extent a = ds.alloc();
  ds.host.resize(static_cast<size_t>(a.size()));
  Point p;
  for (p[0] = a.lo[0]; p[0] < a.hi[0]; ++p[0])
    for (p[1] = a.lo[1]; p[1] < a.hi[1]; ++p[1])
      for (p[2] = a.lo[2]; p[2] < a.hi[2]; ++p[2]) ds.host[a.flatten(p)] = fill(p);

  mesh.datasets.push_back(std::move(ds));
  return static_cast<DatasetId>(mesh.datasets.size() - 1);
}

}  // namespace ooc
