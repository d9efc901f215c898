#include "doctest.h"
#include "support.hpp"

using namespace ooc;

namespace {

ParLoop inc_loop(DatasetId d, const Extent& range, double delta) {
  ParLoop l;
  l.range = range;
  l.args = {{d, Stencil::point(), AccessMode::read_write}};
  l.kernel.writes.push_back({0, ex::add(ex::r(0, 0, 0), ex::c(delta))});
  return l;
}

ParLoop sum_loop(DatasetId d, const Extent& range, const std::string& name) {
  ParLoop l;
  l.range = range;
  l.args = {{d, Stencil::point(), AccessMode::read}};
  l.kernel.reduce = ReduceOp::sum;
  l.kernel.reduce_expr = ex::r(0, 0, 0);
  l.kernel.reduce_name = name;
  return l;
}

}  // namespace

TEST_CASE("loops stay queued until something returns data") {
  Runtime rt;
  DatasetId d = rt.declare("d", Extent::line(0, 8), {0, 0, 0}, 8, 1.0);
  for (int i = 0; i < 3; ++i) rt.enqueue_loop(inc_loop(d, Extent::line(0, 8), 1.0));
  CHECK(rt.pending_loops() == 3);
  CHECK(rt.chains_flushed() == 0);
  CHECK(rt.mesh()[d].at({0, 0, 0}) == 1.0);  // nothing executed yet

  auto values = rt.fetch_dataset(d);
  CHECK(rt.pending_loops() == 0);
  CHECK(rt.chains_flushed() == 1);
  CHECK(values[0] == 4.0);
}

TEST_CASE("a reduction flushes the chain right after itself") {
  Runtime rt;
  DatasetId d = rt.declare("d", Extent::line(0, 4), {0, 0, 0}, 8, 2.0);
  rt.enqueue_loop(inc_loop(d, Extent::line(0, 4), 1.0));
  rt.enqueue_loop(sum_loop(d, Extent::line(0, 4), "total"));
  CHECK(rt.pending_loops() == 0);
  CHECK(rt.chains_flushed() == 1);
  CHECK(rt.flush_log().back().reason == FlushReason::reduction_fetch);
  CHECK(rt.flush_log().back().loop_count == 2);  // the reducing loop rides in its chain
  CHECK(rt.fetch_reduction("total") == 12.0);

  rt.enqueue_loop(inc_loop(d, Extent::line(0, 4), 1.0));
  rt.flush();
  CHECK(rt.chains_flushed() == 2);
}

TEST_CASE("fetch with nothing pending returns the initial fill without executing") {
  Runtime rt;
  DatasetId d = rt.declare("d", Extent::line(0, 4), {0, 0, 0}, 8, 7.0);
  auto values = rt.fetch_dataset(d);
  CHECK(rt.chains_flushed() == 0);
  for (double v : values) CHECK(v == 7.0);
}

TEST_CASE("fetched values reflect pending writers exactly as the reference executor") {
  std::mt19937 rng(99);
  for (int i = 0; i < 10; ++i) {
    auto sc = testsup::random_scenario(rng);
    Runtime rt;  // reference executor
    rt.mesh() = testsup::clone_mesh(sc.mesh);
    for (const auto& l : sc.chain.loops) {
      ParLoop copy = l;
      rt.enqueue_loop(std::move(copy));
    }
    Mesh direct = testsup::clone_mesh(sc.mesh);
    run_chain_reference(direct, sc.chain);
    for (size_t d = 0; d < direct.datasets.size(); ++d) {
      auto got = rt.fetch_dataset(static_cast<DatasetId>(d));
      CHECK(std::memcmp(got.data(), direct.datasets[d].host.data(),
                        got.size() * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("observational equivalence across executors") {
  std::mt19937 rng(123);
  for (int i = 0; i < 8; ++i) {
    auto sc = testsup::random_scenario(rng);
    std::vector<std::vector<double>> fetched[4];
    ExecutorKind kinds[4] = {ExecutorKind::reference, ExecutorKind::tiled_explicit,
                             ExecutorKind::tiled_cache, ExecutorKind::unified};
    for (int k = 0; k < 4; ++k) {
      RuntimeOptions opts;
      opts.executor = kinds[k];
      opts.device = testsup::test_config();
      opts.tiles = 3;
      Runtime rt(opts);
      rt.mesh() = testsup::clone_mesh(sc.mesh);
      for (const auto& l : sc.chain.loops) {
        ParLoop copy = l;
        rt.enqueue_loop(std::move(copy));
      }
      for (size_t d = 0; d < sc.mesh.datasets.size(); ++d)
        fetched[k].push_back(rt.fetch_dataset(static_cast<DatasetId>(d)));
    }
    for (int k = 1; k < 4; ++k)
      for (size_t d = 0; d < fetched[0].size(); ++d)
        CHECK(std::memcmp(fetched[0][d].data(), fetched[k][d].data(),
                          fetched[0][d].size() * sizeof(double)) == 0);
  }
}

TEST_CASE("each fetch bounds exactly one chain") {
  Runtime rt;
  DatasetId d = rt.declare("d", Extent::line(0, 8), {0, 0, 0}, 8, 0.0);
  rt.enqueue_loop(inc_loop(d, Extent::line(0, 8), 1.0));
  rt.fetch_dataset(d);
  rt.enqueue_loop(inc_loop(d, Extent::line(0, 8), 1.0));
  rt.enqueue_loop(inc_loop(d, Extent::line(0, 8), 1.0));
  rt.fetch_dataset(d);
  rt.finish();  // nothing pending: no extra chain
  CHECK(rt.chains_flushed() == 2);
  REQUIRE(rt.flush_log().size() == 2);
  CHECK(rt.flush_log()[0].loop_count == 1);
  CHECK(rt.flush_log()[1].loop_count == 2);
  CHECK(rt.flush_log()[1].reason == FlushReason::data_fetch);
}

TEST_CASE("cyclic flag: off by default, discards only while enabled") {
  RuntimeOptions opts;
  opts.executor = ExecutorKind::tiled_explicit;
  opts.device = testsup::test_config();
  opts.tiles = 2;
  Runtime rt(opts);
  CHECK_FALSE(rt.cyclic_flag());

  DatasetId in = rt.declare("in", Extent::line(0, 16), {0, 0, 0}, 8, 3.0);
  DatasetId tmp = rt.declare("tmp", Extent::line(0, 16), {0, 0, 0}, 8, 0.0);
  DatasetId out = rt.declare("out", Extent::line(0, 16), {0, 0, 0}, 8, 0.0);

  auto round = [&] {
    ParLoop l1;
    l1.range = Extent::line(0, 16);
    l1.args = {{in, Stencil::point(), AccessMode::read},
               {tmp, Stencil::point(), AccessMode::write}};
    l1.kernel.writes.push_back({1, ex::mul(ex::r(0, 0, 0), ex::c(2.0))});
    rt.enqueue_loop(std::move(l1));
    ParLoop l2;
    l2.range = Extent::line(0, 16);
    l2.args = {{tmp, Stencil::point(), AccessMode::read},
               {out, Stencil::point(), AccessMode::write}};
    l2.kernel.writes.push_back({1, ex::add(ex::r(0, 0, 0), ex::c(1.0))});
    rt.enqueue_loop(std::move(l2));
    rt.flush();
  };

  round();
  index_t down_plain = rt.downloaded();
  CHECK_FALSE(rt.mesh()[tmp].host_stale);

  rt.set_cyclic_flag(true);
  round();
  index_t down_cyclic = rt.downloaded() - down_plain;
  CHECK(down_cyclic < down_plain);  // tmp's downloads disappeared
  CHECK(rt.mesh()[tmp].host_stale);
  CHECK_THROWS_AS(rt.fetch_dataset(tmp), StaleDataError);

  rt.set_cyclic_flag(false);
  round();  // downloads resume and refresh the host copy
  CHECK_FALSE(rt.mesh()[tmp].host_stale);
  auto v = rt.fetch_dataset(tmp);
  CHECK(v[0] == 6.0);
}

TEST_CASE("stale datasets cannot be consumed as inputs by a later chain") {
  RuntimeOptions opts;
  opts.executor = ExecutorKind::tiled_explicit;
  opts.device = testsup::test_config();
  opts.tiles = 2;
  Runtime rt(opts);
  rt.set_cyclic_flag(true);
  DatasetId tmp = rt.declare("tmp", Extent::line(0, 16), {0, 0, 0}, 8, 0.0);
  DatasetId out = rt.declare("out", Extent::line(0, 16), {0, 0, 0}, 8, 0.0);

  ParLoop wr;
  wr.range = Extent::line(0, 16);
  wr.args = {{tmp, Stencil::point(), AccessMode::write}};
  wr.kernel.writes.push_back({0, ex::c(5.0)});
  rt.enqueue_loop(std::move(wr));
  rt.flush();
  CHECK(rt.mesh()[tmp].host_stale);

  ParLoop rd;
  rd.range = Extent::line(0, 16);
  rd.args = {{tmp, Stencil::point(), AccessMode::read},
             {out, Stencil::point(), AccessMode::write}};
  rd.kernel.writes.push_back({1, ex::r(0, 0, 0)});
  rt.enqueue_loop(std::move(rd));
  CHECK_THROWS_AS(rt.flush(), StaleDataError);
}
