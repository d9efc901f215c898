#include "ooc/reference.hpp"

#include <chrono>

namespace ooc {

ReferenceResult run_chain_reference(Mesh& mesh, const LoopChain& chain, ExecPolicy policy) {
  ReferenceResult res;
  for (const ParLoop& loop : chain.loops) {
    std::vector<ArgView> views;
    views.reserve(loop.args.size());
    for (const auto& a : loop.args) {
      Dataset& ds = mesh[a.dataset];
      views.push_back({ds.host.data(), ds.alloc()});
      if (access_writes(a.mode)) ds.ever_written = true;
    }
    double acc = reduce_identity(loop.kernel.reduce);
    auto t0 = std::chrono::steady_clock::now();
    apply_loop(loop, loop.range, views, policy, loop.has_reduction() ? &acc : nullptr);
    auto t1 = std::chrono::steady_clock::now();
    res.loop_wall_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (loop.has_reduction()) res.reductions[loop.id] = acc;
  }
  return res;
}

}  // namespace ooc
