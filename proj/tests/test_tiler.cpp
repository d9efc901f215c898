#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace ooc;

namespace {

// L writes `dst` at each point reading `src` through `st`.
ParLoop copy_loop(DatasetId src, DatasetId dst, const Stencil& st, const Extent& range) {
  ParLoop l;
  l.range = range;
  l.args = {{src, st, AccessMode::read}, {dst, Stencil::point(), AccessMode::write}};
  l.kernel.writes.push_back({1, ex::r(0, 0, 0)});
  return l;
}

ParLoop fill_loop(DatasetId dst, const Extent& range, double v = 1.0) {
  ParLoop l;
  l.range = range;
  l.args = {{dst, Stencil::point(), AccessMode::write}};
  l.kernel.writes.push_back({0, ex::c(v)});
  return l;
}

struct Line3 {
  Mesh mesh;
  DatasetId a, b, c;
  LoopChain chain;  // fill a; b = a (+-1); c = b (+-1)
};

Line3 make_line3(index_t halo = 2) {
  Line3 s;
  s.a = declare_dataset(s.mesh, "a", Extent::line(0, 12), {halo, 0, 0}, 8, 0.0);
  s.b = declare_dataset(s.mesh, "b", Extent::line(0, 12), {halo, 0, 0}, 8, 0.0);
  s.c = declare_dataset(s.mesh, "c", Extent::line(0, 12), {halo, 0, 0}, 8, 0.0);
  Stencil pm1 = Stencil::line(0, 1);
  ParLoop l0 = fill_loop(s.a, Extent::line(0, 12));
  ParLoop l1 = copy_loop(s.a, s.b, pm1, Extent::line(0, 12));
  ParLoop l2 = copy_loop(s.b, s.c, pm1, Extent::line(0, 12));
  int id = 0;
  for (ParLoop* l : {&l0, &l1, &l2}) {
    validate_loop(s.mesh, *l);
    l->id = id++;
    s.chain.loops.push_back(*l);
  }
  return s;
}

}  // namespace

TEST_CASE("plan without dependencies splits the range evenly") {
  Mesh mesh;
  DatasetId a = declare_dataset(mesh, "a", Extent::line(0, 12), {0, 0, 0}, 8, 0.0);
  LoopChain chain;
  ParLoop l = fill_loop(a, Extent::line(0, 12));
  validate_loop(mesh, l);
  l.id = 0;
  chain.loops.push_back(l);

  TilePlan plan = compute_tile_plan(mesh, chain, 3, 0);
  CHECK(plan.tile_count == 3);
  CHECK(plan.subrange(0, 0) == Extent::line(0, 4));
  CHECK(plan.subrange(0, 1) == Extent::line(4, 8));
  CHECK(plan.subrange(0, 2) == Extent::line(8, 12));
  CHECK(dependency_oracle(mesh, chain, plan).ok);
}

TEST_CASE("a +-1 consumer skews its producer forward by one") {
  Mesh mesh;
  DatasetId a = declare_dataset(mesh, "a", Extent::line(0, 12), {1, 0, 0}, 8, 0.0);
  DatasetId b = declare_dataset(mesh, "b", Extent::line(0, 12), {0, 0, 0}, 8, 0.0);
  LoopChain chain;
  ParLoop l1 = fill_loop(a, Extent::line(0, 12));
  ParLoop l2 = copy_loop(a, b, Stencil::line(0, 1), Extent::line(0, 12));
  validate_loop(mesh, l1);
  validate_loop(mesh, l2);
  l1.id = 0;
  l2.id = 1;
  chain.loops.push_back(l1);
  chain.loops.push_back(l2);

  TilePlan plan = compute_tile_plan(mesh, chain, 2, 0);
  CHECK(plan.nominal_ends[0] == 6);
  CHECK(plan.ends[1][0] == 6);  // consumer ends at the nominal boundary
  CHECK(plan.ends[0][0] == 7);  // producer runs one point ahead
  CHECK(plan.subrange(0, 0) == Extent::line(0, 7));
  CHECK(plan.subrange(0, 1) == Extent::line(7, 12));
  CHECK(plan.subrange(1, 0) == Extent::line(0, 6));
  CHECK(plan.subrange(1, 1) == Extent::line(6, 12));
  CHECK(dependency_oracle(mesh, chain, plan).ok);
}

TEST_CASE("skew accumulates along a three-loop chain") {
  Line3 s = make_line3();
  TilePlan plan = compute_tile_plan(s.mesh, s.chain, 2, 0);
  CHECK(plan.ends[2][0] == 6);
  CHECK(plan.ends[1][0] == 7);
  CHECK(plan.ends[0][0] == 8);
  CHECK(dependency_oracle(s.mesh, s.chain, plan).ok);
}

TEST_CASE("oracle pinpoints a read of not-yet-written data when skew is removed") {
  Mesh mesh;
  DatasetId a = declare_dataset(mesh, "a", Extent::line(0, 12), {1, 0, 0}, 8, 0.0);
  DatasetId b = declare_dataset(mesh, "b", Extent::line(0, 12), {0, 0, 0}, 8, 0.0);
  LoopChain chain;
  ParLoop l1 = fill_loop(a, Extent::line(0, 12));
  ParLoop l2 = copy_loop(a, b, Stencil::line(0, 1), Extent::line(0, 12));
  validate_loop(mesh, l1);
  validate_loop(mesh, l2);
  l1.id = 0;
  l2.id = 1;
  chain.loops.push_back(l1);
  chain.loops.push_back(l2);

  TilePlan plan = compute_tile_plan(mesh, chain, 2, 0);
  plan.ends[0][0] = 6;  // zero the skew by hand
  OracleResult r = dependency_oracle(mesh, chain, plan);
  CHECK_FALSE(r.ok);
  CHECK(r.tile == 0);
  CHECK(r.loop == 1);
  CHECK(r.dataset == "a");
  CHECK(r.point == Point{6, 0, 0});
}

TEST_CASE("single tile is always dependency-safe") {
  std::mt19937 rng(11);
  for (int i = 0; i < 30; ++i) {
    auto sc = testsup::random_scenario(rng);
    TilePlan plan = compute_tile_plan(sc.mesh, sc.chain, 1, 0);
    CHECK(dependency_oracle(sc.mesh, sc.chain, plan).ok);
  }
}

TEST_CASE("tile counts beyond the extent are reduced with a warning") {
  Mesh mesh;
  DatasetId a = declare_dataset(mesh, "a", Extent::line(0, 4), {0, 0, 0}, 8, 0.0);
  LoopChain chain;
  ParLoop l = fill_loop(a, Extent::line(0, 4));
  validate_loop(mesh, l);
  l.id = 0;
  chain.loops.push_back(l);
  TilePlan plan = compute_tile_plan(mesh, chain, 9, 0);
  CHECK(plan.tile_count == 4);
  CHECK_FALSE(plan.warnings.empty());
}

TEST_CASE("ping-pong chains stay safe under tiling (anti-dependences honoured)") {
  // u -> tmp -> u ... : the later writer of u must never run ahead of the
  // earlier +-1 reader of u
  Mesh mesh;
  DatasetId u = declare_dataset(mesh, "u", Extent::rect(0, 16, 0, 16), {1, 1, 0}, 8,
                                [](Point p) { return 0.25 * double(p[0]) - 0.5 * double(p[1]); });
  DatasetId tmp = declare_dataset(mesh, "tmp", Extent::rect(0, 16, 0, 16), {1, 1, 0}, 8, 0.0);
  LoopChain chain;
  Extent interior = Extent::rect(1, 15, 1, 15);
  for (int it = 0; it < 4; ++it) {
    ParLoop l = copy_loop(it % 2 ? tmp : u, it % 2 ? u : tmp, Stencil::star(2, 1), interior);
    validate_loop(mesh, l);
    l.id = it;
    chain.loops.push_back(l);
  }
  for (int T = 1; T <= 4; ++T) {
    TilePlan plan = compute_tile_plan(mesh, chain, T, 0);
    OracleResult r = dependency_oracle(mesh, chain, plan);
    INFO(r.message);
    CHECK(r.ok);
  }
}

TEST_CASE("randomised chains: every plan passes the oracle and covers exactly once") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 120; ++i) {
    auto sc = testsup::random_scenario(rng);
    std::uniform_int_distribution<int> tiles(1, 4);
    int T = tiles(rng);
    TilePlan plan = compute_tile_plan(sc.mesh, sc.chain, T, 0);
    OracleResult r = dependency_oracle(sc.mesh, sc.chain, plan);
    INFO("chain ", i, " T=", T, ": ", r.message);
    CHECK(r.ok);

    for (size_t j = 0; j < sc.chain.loops.size(); ++j) {
      index_t covered = 0;
      for (int t = 0; t < plan.tile_count; ++t)
        covered += plan.subrange(static_cast<int>(j), t).size();
      CHECK(covered == sc.chain.loops[j].range.size());
    }
  }
}

TEST_CASE("monotone skew: producers stay ahead of consumers by the read extent") {
  std::mt19937 rng(77);
  for (int i = 0; i < 60; ++i) {
    auto sc = testsup::random_scenario(rng);
    TilePlan plan = compute_tile_plan(sc.mesh, sc.chain, 3, 0);
    const int n = static_cast<int>(sc.chain.loops.size());
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (const auto& ak : sc.chain.loops[k].args) {
          if (!access_reads(ak.mode)) continue;
          if (!sc.chain.loops[j].writes_dataset(ak.dataset)) continue;
          auto [lo, hi] = stencil_extents(ak.stencil);
          if (hi[0] <= 0) continue;
          for (int t = 0; t < plan.tile_count - 1; ++t) {
            // the inequality binds only where neither boundary is clamped
            // to its loop's range end
            if (plan.ends[k][t] >= sc.chain.loops[k].range.hi[0]) continue;
            if (plan.ends[k][t] + hi[0] > sc.chain.loops[j].range.hi[0]) continue;
            CHECK(plan.ends[j][t] >= plan.ends[k][t] + hi[0]);
          }
        }
  }
}

TEST_CASE("footprints: point-stencil tile footprint equals the sub-range") {
  Mesh mesh;
  DatasetId a = declare_dataset(mesh, "a", Extent::line(0, 12), {0, 0, 0}, 8, 0.0);
  LoopChain chain;
  ParLoop l = fill_loop(a, Extent::line(0, 12));
  validate_loop(mesh, l);
  l.id = 0;
  chain.loops.push_back(l);
  TilePlan plan = compute_tile_plan(mesh, chain, 3, 0);
  Footprints fp = compute_footprints(mesh, chain, plan);
  CHECK(fp.per_dataset[a].full[1] == Extent::line(4, 8));
  CHECK(fp.per_dataset[a].modified[1]);
  CHECK(fp.per_dataset[a].write_first);
}

TEST_CASE("footprints: read extents widen the footprint up to the allocation") {
  Mesh mesh;
  DatasetId a = declare_dataset(mesh, "a", Extent::line(0, 12), {1, 0, 0}, 8, 0.0);
  DatasetId b = declare_dataset(mesh, "b", Extent::line(0, 12), {0, 0, 0}, 8, 0.0);
  LoopChain chain;
  ParLoop l = copy_loop(a, b, Stencil::line(0, 1), Extent::line(0, 12));
  validate_loop(mesh, l);
  l.id = 0;
  chain.loops.push_back(l);
  TilePlan plan = compute_tile_plan(mesh, chain, 2, 0);
  REQUIRE(plan.subrange(0, 1) == Extent::line(6, 12));
  Footprints fp = compute_footprints(mesh, chain, plan);
  CHECK(fp.per_dataset[a].full[1] == Extent::line(5, 13));  // clamped to [-1, 13)
  CHECK_FALSE(fp.per_dataset[a].write_first);
}

TEST_CASE("footprints: edges and left/right footprints partition the tiles") {
  // producer/consumer on a halo-free grid: footprints [0,7) and [5,12)
  Mesh mesh;
  DatasetId a = declare_dataset(mesh, "a", Extent::line(0, 12), {0, 0, 0}, 8, 0.0);
  DatasetId b = declare_dataset(mesh, "b", Extent::line(0, 12), {0, 0, 0}, 8, 0.0);
  LoopChain chain;
  ParLoop l1 = fill_loop(a, Extent::line(0, 12));
  ParLoop l2 = copy_loop(a, b, Stencil::line(0, 1), Extent::line(1, 11));
  validate_loop(mesh, l1);
  validate_loop(mesh, l2);
  l1.id = 0;
  l2.id = 1;
  chain.loops.push_back(l1);
  chain.loops.push_back(l2);
  TilePlan plan = compute_tile_plan(mesh, chain, 2, 0);
  Footprints fp = compute_footprints(mesh, chain, plan);
  const auto& pa = fp.per_dataset[a];
  CHECK(pa.full[0] == Extent::line(0, 7));
  CHECK(pa.full[1] == Extent::line(5, 12));
  CHECK(pa.right_edge[0] == Extent::line(5, 7));
  CHECK(pa.left_fp[0] == Extent::line(0, 5));
  CHECK(pa.left_edge[1] == Extent::line(5, 7));
  CHECK(pa.right_fp[1] == Extent::line(7, 12));
  CHECK(pa.left_fp[1] == Extent::line(5, 12));
  CHECK(pa.left_edge[0].empty());
  CHECK(pa.right_edge[1].empty());
}

TEST_CASE("edge identity holds on randomised chains") {
  std::mt19937 rng(31337);
  for (int i = 0; i < 40; ++i) {
    auto sc = testsup::random_scenario(rng);
    TilePlan plan = compute_tile_plan(sc.mesh, sc.chain, 4, 0);
    Footprints fp = compute_footprints(sc.mesh, sc.chain, plan);
    for (const auto& pd : fp.per_dataset) {
      if (!pd.accessed) continue;
      for (int t = 0; t + 1 < plan.tile_count; ++t)
        CHECK(pd.right_edge[t] == pd.left_edge[t + 1]);
      for (int t = 0; t < plan.tile_count; ++t) {
        if (pd.full[t].empty()) continue;
        CHECK(pd.left_fp[t].size() + pd.right_edge[t].size() == pd.full[t].size());
        CHECK(pd.right_fp[t].size() + pd.left_edge[t].size() == pd.full[t].size());
      }
    }
  }
}

TEST_CASE("choose_tile_count picks the smallest feasible count") {
  Line3 s = make_line3();
  index_t problem = 0;
  for (const auto& ds : s.mesh.datasets) problem += ds.alloc().size() * ds.elem_bytes;

  TileChoice one = choose_tile_count(s.mesh, s.chain, 3 * problem, 0);
  CHECK(one.tile_count == 1);

  TileChoice halves = choose_tile_count(s.mesh, s.chain, 3 * problem * 3 / 4, 0);
  CHECK(halves.tile_count > 1);
  CHECK(3 * halves.slot_bytes <= 3 * problem * 3 / 4);
  // smallest: every smaller count is infeasible
  for (int T = 1; T < halves.tile_count; ++T) {
    TilePlan plan = compute_tile_plan(s.mesh, s.chain, T, 0);
    Footprints fp = compute_footprints(s.mesh, s.chain, plan);
    CHECK(3 * fp.slot_bytes > 3 * problem * 3 / 4);
  }

  CHECK_THROWS_AS(choose_tile_count(s.mesh, s.chain, 8, 0), InfeasibleError);
}

TEST_CASE("plans are cached by chain structure, not kernel constants") {
  Line3 s = make_line3();
  PlanCache cache;
  cache.get(s.mesh, s.chain, 2, 0);
  CHECK(cache.misses == 1);
  LoopChain same_shape = s.chain;
  same_shape.loops[0].kernel.writes[0].expr = ex::c(99.0);  // different constant
  cache.get(s.mesh, same_shape, 2, 0);
  CHECK(cache.hits == 1);
  CHECK(cache.size() == 1);
}

TEST_CASE("plan dump emits the table and its JSON mirror") {
  Line3 s = make_line3();
  TilePlan plan = compute_tile_plan(s.mesh, s.chain, 2, 0);
  Footprints fp = compute_footprints(s.mesh, s.chain, plan);
  std::string text = plan_dump_text(s.mesh, s.chain, plan, fp);
  CHECK(text.find("tile 0") != std::string::npos);
  CHECK(text.find("loop 0 range [0,8)") != std::string::npos);

  std::string json = plan_dump_json(s.mesh, s.chain, plan, fp);
  CHECK(json.find("\"tiles\": 2") != std::string::npos);
  CHECK(json.find("\"slot_bytes\"") != std::string::npos);
}

TEST_CASE("plan dump JSON golden file for the cumulative-skew chain") {
  // frozen output: any change to boundaries, footprints or schema shows up
  Line3 s = make_line3(1);
  TilePlan plan = compute_tile_plan(s.mesh, s.chain, 2, 0);
  Footprints fp = compute_footprints(s.mesh, s.chain, plan);
  nlohmann::json got = nlohmann::json::parse(plan_dump_json(s.mesh, s.chain, plan, fp));
  nlohmann::json want = nlohmann::json::parse(R"json({
    "tiled_dim": 0, "tiles": 2, "slot_bytes": 184, "nominal_ends": [6, 12],
    "tiles_detail": [
      {"tile": 0,
       "loops": [{"loop": 0, "empty": false, "range": {"lo": [0], "hi": [8]}},
                 {"loop": 1, "empty": false, "range": {"lo": [0], "hi": [7]}},
                 {"loop": 2, "empty": false, "range": {"lo": [0], "hi": [6]}}],
       "datasets": [
         {"dataset": "a", "full": {"lo": [-1], "hi": [8]}, "bytes": 72, "modified": true},
         {"dataset": "b", "full": {"lo": [-1], "hi": [7]}, "bytes": 64, "modified": true},
         {"dataset": "c", "full": {"lo": [0], "hi": [6]}, "bytes": 48, "modified": true}]},
      {"tile": 1,
       "loops": [{"loop": 0, "empty": false, "range": {"lo": [8], "hi": [12]}},
                 {"loop": 1, "empty": false, "range": {"lo": [7], "hi": [12]}},
                 {"loop": 2, "empty": false, "range": {"lo": [6], "hi": [12]}}],
       "datasets": [
         {"dataset": "a", "full": {"lo": [6], "hi": [13]}, "bytes": 56, "modified": true},
         {"dataset": "b", "full": {"lo": [5], "hi": [13]}, "bytes": 64, "modified": true},
         {"dataset": "c", "full": {"lo": [6], "hi": [12]}, "bytes": 48, "modified": true}]}
    ]})json");
  CHECK(got == want);
}
