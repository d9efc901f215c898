#pragma once

#include <map>
#include <string>

#include "ooc/runtime.hpp"

namespace ooc {

/// Loads a chain-description file (JSON) into the runtime: declares its
/// datasets, then enqueues its loops in order. Kernels are prefix-notation
/// expression strings per written argument, e.g.
///   {"writes": {"1": "(+ (r 0 0 0) 1)"},
///    "reduction": {"op": "SUM", "expr": "(r 0 0 0)", "name": "total"}}
/// Dataset fills are numbers or expressions over the coordinates i,j,k.
/// The stencil name "point" is predefined.
struct ChainFileResult {
  std::map<std::string, DatasetId> datasets;
  int loops_enqueued = 0;
};

ChainFileResult load_chain_file(Runtime& rt, const std::string& path);
ChainFileResult load_chain_json(Runtime& rt, const std::string& json_text);

}  // namespace ooc
