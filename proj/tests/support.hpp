#pragma once

#include <cstring>
#include <random>

#include "ooc/cache_exec.hpp"
#include "ooc/explicit_exec.hpp"
#include "ooc/reference.hpp"
#include "ooc/runtime.hpp"
#include "ooc/tiler.hpp"
#include "ooc/unified_exec.hpp"

namespace testsup {

using namespace ooc;

struct RandomChainOpts {
  int max_loops = 8;
  int max_datasets = 4;
  index_t max_extent = 2;  // stencil radius bound
  index_t min_size = 8, max_size = 24;
  bool allow_reductions = false;
  bool allow_3d = true;
};

struct Scenario {
  Mesh mesh;
  LoopChain chain;
};

inline Stencil random_stencil(std::mt19937& rng, int ndim, index_t max_extent) {
  std::uniform_int_distribution<int> n_offsets(1, 5);
  std::uniform_int_distribution<index_t> off(-max_extent, max_extent);
  Stencil s;
  s.offsets.push_back({0, 0, 0});  // keep the centre so kernels can always read it
  int n = n_offsets(rng);
  for (int i = 0; i < n; ++i) {
    Point p{0, 0, 0};
    for (int d = 0; d < ndim; ++d) p[d] = off(rng);
    if (!s.has_offset(p)) s.offsets.push_back(p);
  }
  return s;
}

inline ExprPtr random_expr(std::mt19937& rng, const std::vector<std::pair<int, const Stencil*>>& reads,
                           int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  int roll = pick(rng);
  if (depth <= 0 || roll < 4 || reads.empty()) {
    if (!reads.empty() && roll % 2 == 0) {
      std::uniform_int_distribution<size_t> which(0, reads.size() - 1);
      auto [arg, st] = reads[which(rng)];
      std::uniform_int_distribution<size_t> o(0, st->offsets.size() - 1);
      Point off = st->offsets[o(rng)];
      return ex::r(arg, off[0], off[1], off[2]);
    }
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    return ex::c(val(rng));
  }
  ExprOp ops[] = {ExprOp::add, ExprOp::sub, ExprOp::mul, ExprOp::min, ExprOp::max, ExprOp::add};
  std::uniform_int_distribution<int> o(0, 5);
  return ex::bin(ops[o(rng)], random_expr(rng, reads, depth - 1),
                 random_expr(rng, reads, depth - 1));
}

inline Scenario random_scenario(std::mt19937& rng, const RandomChainOpts& opts = {}) {
  Scenario sc;
  std::uniform_int_distribution<int> ndim_pick(1, opts.allow_3d ? 6 : 4);
  int roll = ndim_pick(rng);
  int ndim = roll <= 2 ? 1 : roll <= 5 ? 2 : 3;
  std::uniform_int_distribution<index_t> size(opts.min_size, opts.max_size);
  std::uniform_int_distribution<int> nd(1, opts.max_datasets);
  std::uniform_int_distribution<int> nl(1, opts.max_loops);

  Point dims{1, 1, 1};
  for (int d = 0; d < ndim; ++d) dims[d] = ndim == 3 ? std::min<index_t>(size(rng), 10) : size(rng);
  Extent core = Extent::make(ndim, {0, 0, 0}, dims);
  Point halo{0, 0, 0};
  for (int d = 0; d < ndim; ++d) halo[d] = opts.max_extent;

  int n_datasets = nd(rng);
  std::uniform_real_distribution<double> coef(-0.1, 0.1);
  for (int i = 0; i < n_datasets; ++i) {
    double a = coef(rng), b = coef(rng), c = coef(rng);
    declare_dataset(sc.mesh, "d" + std::to_string(i), core, halo, 8, [=](Point p) {
      return 1.0 + a * static_cast<double>(p[0]) + b * static_cast<double>(p[1]) +
             c * static_cast<double>(p[2]);
    });
  }

  int n_loops = nl(rng);
  std::uniform_int_distribution<int> ds(0, n_datasets - 1);
  std::uniform_int_distribution<int> extra_reads(0, 2);
  std::uniform_int_distribution<int> mode_pick(0, 9);
  for (int j = 0; j < n_loops; ++j) {
    ParLoop loop;
    // random sub-box of the core
    Point lo{0, 0, 0}, hi{1, 1, 1};
    for (int d = 0; d < ndim; ++d) {
      std::uniform_int_distribution<index_t> l(0, dims[d] - 2);
      lo[d] = l(rng);
      std::uniform_int_distribution<index_t> h(lo[d] + 1, dims[d]);
      hi[d] = h(rng);
    }
    loop.range = Extent::make(ndim, lo, hi);

    int dw = ds(rng);
    bool rw = mode_pick(rng) < 3;
    loop.args.push_back(
        {dw, Stencil::point(), rw ? AccessMode::read_write : AccessMode::write});
    int nr = extra_reads(rng);
    for (int r = 0; r < nr; ++r) {
      int dr = ds(rng);
      if (dr == dw) continue;
      bool dup = false;
      for (const auto& a : loop.args) dup |= a.dataset == dr && access_writes(a.mode);
      if (dup) continue;
      loop.args.push_back({dr, random_stencil(rng, ndim, opts.max_extent), AccessMode::read});
    }

    std::vector<std::pair<int, const Stencil*>> reads;
    for (size_t a = 0; a < loop.args.size(); ++a)
      if (access_reads(loop.args[a].mode))
        reads.push_back({static_cast<int>(a), &loop.args[a].stencil});
    loop.kernel.writes.push_back({0, random_expr(rng, reads, 3)});

    if (opts.allow_reductions && mode_pick(rng) < 2) {
      loop.kernel.reduce = ReduceOp::sum;
      loop.kernel.reduce_expr = random_expr(rng, reads, 2);
      loop.kernel.reduce_name = "red" + std::to_string(j);
    }

    validate_loop(sc.mesh, loop);
    loop.id = j;
    sc.chain.loops.push_back(std::move(loop));
  }
  return sc;
}

inline Mesh clone_mesh(const Mesh& m) { return m; }

inline bool buffers_equal(const Mesh& a, const Mesh& b) {
  for (size_t d = 0; d < a.datasets.size(); ++d) {
    if (a.datasets[d].host.size() != b.datasets[d].host.size()) return false;
    if (std::memcmp(a.datasets[d].host.data(), b.datasets[d].host.data(),
                    a.datasets[d].host.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

inline DeviceConfig test_config() {
  DeviceConfig cfg;
  cfg.capacity_bytes = 1LL << 40;
  cfg.cache_page_bytes = 256;
  return cfg;
}

}  // namespace testsup
