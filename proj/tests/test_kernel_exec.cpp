#include "doctest.h"
#include "support.hpp"

using namespace ooc;

TEST_CASE("serial and OpenMP kernel application are bitwise identical") {
  std::mt19937 rng(20240);
  for (int i = 0; i < 25; ++i) {
    testsup::RandomChainOpts opts;
    opts.allow_reductions = true;
    auto sc = testsup::random_scenario(rng, opts);
    Mesh serial = testsup::clone_mesh(sc.mesh);
    Mesh parallel = testsup::clone_mesh(sc.mesh);
    for (const auto& loop : sc.chain.loops) {
      std::vector<ArgView> vs, vp;
      for (const auto& a : loop.args) {
        vs.push_back({serial[a.dataset].host.data(), serial[a.dataset].alloc()});
        vp.push_back({parallel[a.dataset].host.data(), parallel[a.dataset].alloc()});
      }
      double acc_s = reduce_identity(loop.kernel.reduce);
      double acc_p = acc_s;
      apply_loop(loop, loop.range, vs, ExecPolicy::serial,
                 loop.has_reduction() ? &acc_s : nullptr);
      apply_loop(loop, loop.range, vp, ExecPolicy::openmp,
                 loop.has_reduction() ? &acc_p : nullptr);
      if (loop.has_reduction()) CHECK(std::memcmp(&acc_s, &acc_p, sizeof(double)) == 0);
    }
    CHECK(testsup::buffers_equal(serial, parallel));
  }
}

TEST_CASE("whole runs stay bitwise identical across kernel policies") {
  ooc::RuntimeOptions serial_opts;
  serial_opts.policy = ExecPolicy::serial;
  serial_opts.executor = ExecutorKind::tiled_explicit;
  serial_opts.device = testsup::test_config();
  serial_opts.tiles = 3;
  ooc::RuntimeOptions omp_opts = serial_opts;
  omp_opts.policy = ExecPolicy::openmp;

  std::mt19937 rng(4);
  for (int i = 0; i < 6; ++i) {
    auto sc = testsup::random_scenario(rng);
    Runtime rs(serial_opts), rp(omp_opts);
    rs.mesh() = testsup::clone_mesh(sc.mesh);
    rp.mesh() = testsup::clone_mesh(sc.mesh);
    for (const auto& l : sc.chain.loops) {
      ParLoop c1 = l, c2 = l;
      rs.enqueue_loop(std::move(c1));
      rp.enqueue_loop(std::move(c2));
    }
    rs.finish();
    rp.finish();
    CHECK(testsup::buffers_equal(rs.mesh(), rp.mesh()));
  }
}
