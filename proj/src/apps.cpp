#include "ooc/apps.hpp"

#include <sstream>

#include "ooc/metrics.hpp"

namespace ooc {

namespace {

ParLoop make_loop(Extent range, std::vector<LoopArg> args, KernelSpec kernel) {
  ParLoop l;
  l.range = range;
  l.args = std::move(args);
  l.kernel = std::move(kernel);
  return l;
}

KernelSpec write_expr(int arg, ExprPtr e) {
  KernelSpec k;
  k.writes.push_back({arg, std::move(e)});
  return k;
}

ExprPtr avg4(int arg) {
  using namespace ex;
  return mul(c(0.25), add(add(r(arg, -1, 0), r(arg, 1, 0)), add(r(arg, 0, -1), r(arg, 0, 1))));
}

ExprPtr star5(int arg) {
  using namespace ex;
  return mul(c(0.2), add(add(add(r(arg, -1, 0), r(arg, 1, 0)), add(r(arg, 0, -1), r(arg, 0, 1))),
                         r(arg, 0, 0)));
}

void run_heat2d(Runtime& rt, const AppParams& p) {
  const Extent core = Extent::rect(0, p.nx, 0, p.ny);
  DatasetId u = rt.declare("u", core, {1, 1, 0}, 8,
                           [](Point q) { return 1.0 + 0.001 * q[0] + 0.002 * q[1]; });
  DatasetId tmp = rt.declare("tmp", core, {1, 1, 0}, 8, 0.0);
  if (p.cyclic) rt.set_cyclic_flag(true);

  const Extent interior = Extent::rect(1, p.nx - 1, 1, p.ny - 1);
  const Stencil s5 = Stencil::star(2, 1);
  for (int it = 0; it < p.iters; ++it) {
    DatasetId src = it % 2 == 0 ? u : tmp;
    DatasetId dst = it % 2 == 0 ? tmp : u;
    rt.enqueue_loop(make_loop(interior,
                              {{src, s5, AccessMode::read}, {dst, Stencil::point(), AccessMode::write}},
                              write_expr(1, avg4(0))));
    if (p.tile_span > 0 && (it + 1) % p.tile_span == 0) rt.flush();
  }
  rt.finish();
  (void)tmp;
}

void run_miniflow2d(Runtime& rt, const AppParams& p) {
  const Extent core = Extent::rect(0, p.nx, 0, p.ny);
  const Extent wide = Extent::rect(-1, p.nx + 1, -1, p.ny + 1);  // temporaries cover the
                                                                 // stencil reach of the updates
  DatasetId rho = rt.declare("rho", core, {2, 2, 0}, 8,
                             [](Point q) { return 1.0 + 0.002 * q[0] - 0.001 * q[1]; });
  DatasetId e = rt.declare("e", core, {2, 2, 0}, 8,
                           [](Point q) { return 2.0 + 0.001 * (q[0] + q[1]); });
  DatasetId v = rt.declare("v", core, {2, 2, 0}, 8,
                           [](Point q) { return 0.5 + 0.003 * q[0] + 0.001 * q[1]; });
  DatasetId gamma = rt.declare("gamma", core, {2, 2, 0}, 8, 1.4);
  DatasetId t1 = rt.declare("t1", wide, {0, 0, 0}, 8, 0.0);
  DatasetId t2 = rt.declare("t2", wide, {0, 0, 0}, 8, 0.0);
  DatasetId t3 = rt.declare("t3", wide, {0, 0, 0}, 8, 0.0);
  DatasetId t4 = rt.declare("t4", wide, {0, 0, 0}, 8, 0.0);
  DatasetId t5 = rt.declare("t5", wide, {0, 0, 0}, 8, 0.0);
  DatasetId t6 = rt.declare("t6", wide, {0, 0, 0}, 8, 0.0);

  const Stencil pt = Stencil::point();
  const Stencil s5 = Stencil::star(2, 1);
  const Stencil s3x = Stencil::line(0, 1);
  const Stencil s3y = Stencil::line(1, 1);
  using namespace ex;

  for (int it = 0; it < p.iters; ++it) {
    // stage temporaries over the widened box so the point updates below
    // can read them at +-1
    rt.enqueue_loop(make_loop(wide, {{rho, s5, AccessMode::read}, {t1, pt, AccessMode::write}},
                              write_expr(1, avg4(0))));
    rt.enqueue_loop(make_loop(
        wide, {{e, s3x, AccessMode::read}, {t2, pt, AccessMode::write}},
        write_expr(1, mul(c(0.5), sub(r(0, 1, 0), r(0, -1, 0))))));
    rt.enqueue_loop(make_loop(
        wide, {{v, s3y, AccessMode::read}, {t3, pt, AccessMode::write}},
        write_expr(1, mul(c(0.5), sub(r(0, 0, 1), r(0, 0, -1))))));
    rt.enqueue_loop(make_loop(
        wide,
        {{t1, pt, AccessMode::read}, {t2, pt, AccessMode::read}, {t4, pt, AccessMode::write}},
        write_expr(2, add(r(0, 0, 0), r(1, 0, 0)))));
    rt.enqueue_loop(make_loop(wide, {{v, s5, AccessMode::read}, {t5, pt, AccessMode::write}},
                              write_expr(1, avg4(0))));
    rt.enqueue_loop(make_loop(
        wide,
        {{t3, pt, AccessMode::read},
         {gamma, pt, AccessMode::read},
         {e, pt, AccessMode::read},
         {t6, pt, AccessMode::write}},
        write_expr(3, add(mul(r(0, 0, 0), r(1, 0, 0)), mul(c(0.001), r(2, 0, 0))))));
    rt.enqueue_loop(make_loop(
        core, {{rho, pt, AccessMode::read_write}, {t4, s3x, AccessMode::read}},
        write_expr(0, add(r(0, 0, 0), mul(c(0.01), sub(r(1, 1, 0), r(1, -1, 0)))))));
    rt.enqueue_loop(make_loop(
        core, {{e, pt, AccessMode::read_write}, {t6, s3y, AccessMode::read}},
        write_expr(0, add(r(0, 0, 0), mul(c(0.01), sub(r(1, 0, 1), r(1, 0, -1)))))));
    rt.enqueue_loop(make_loop(
        core, {{v, pt, AccessMode::read_write}, {t5, s5, AccessMode::read}},
        write_expr(0, add(mul(c(0.99), r(0, 0, 0)), mul(c(0.01), avg4(1))))));
    rt.enqueue_loop(make_loop(
        wide,
        {{t4, pt, AccessMode::read}, {t5, pt, AccessMode::read}, {t2, pt, AccessMode::write}},
        write_expr(2, sub(r(0, 0, 0), r(1, 0, 0)))));
    rt.enqueue_loop(make_loop(
        wide,
        {{t1, pt, AccessMode::read}, {t2, pt, AccessMode::read}, {t3, pt, AccessMode::write}},
        write_expr(2, ex::min(r(0, 0, 0), r(1, 0, 0)))));
    rt.enqueue_loop(make_loop(
        core, {{rho, pt, AccessMode::read_write}, {t2, pt, AccessMode::read}},
        write_expr(0, add(r(0, 0, 0), mul(c(0.001), r(1, 0, 0))))));
    rt.enqueue_loop(make_loop(
        core, {{e, pt, AccessMode::read_write}, {t3, pt, AccessMode::read}},
        write_expr(0, add(r(0, 0, 0), mul(c(0.002), r(1, 0, 0))))));
    rt.enqueue_loop(make_loop(
        core, {{v, pt, AccessMode::read_write}, {t3, s3x, AccessMode::read}},
        write_expr(0, add(r(0, 0, 0), mul(c(0.005), add(r(1, -1, 0), r(1, 1, 0)))))));

    if ((it + 1) % 10 == 0) {
      ParLoop red = make_loop(core,
                              {{rho, pt, AccessMode::read},
                               {e, pt, AccessMode::read},
                               {v, pt, AccessMode::read},
                               {gamma, pt, AccessMode::read}},
                              KernelSpec{});
      red.kernel.reduce = ReduceOp::sum;
      red.kernel.reduce_expr =
          add(add(r(0, 0, 0), r(1, 0, 0)), add(r(2, 0, 0), r(3, 0, 0)));
      red.kernel.reduce_name = "fieldsum";
      rt.enqueue_loop(std::move(red));
    }
    if (it == 1) {
      // the two-iteration settling phase ends here; regular cyclic
      // execution begins, and only from now on may temporaries be dropped
      rt.flush();
      if (p.cyclic) rt.set_cyclic_flag(true);
    }
    if (p.tile_span > 0 && (it + 1) % p.tile_span == 0) rt.flush();
  }
  rt.finish();
}

void run_rk3chain(Runtime& rt, const AppParams& p) {
  const int span = p.tile_span > 0 ? p.tile_span : 1;
  const index_t pad = 3 * static_cast<index_t>(span) - 1;
  const Extent core = Extent::rect(-pad, p.nx + pad, -pad, p.ny + pad);
  DatasetId w = rt.declare("w", Extent::rect(-pad, p.nx + pad, -pad, p.ny + pad), {1, 1, 0}, 8,
                           [](Point q) { return 1.0 + 0.0015 * q[0] - 0.0005 * q[1]; });
  DatasetId r_ = rt.declare("r", core, {0, 0, 0}, 8, 0.0);
  DatasetId k_ = rt.declare("k", core, {0, 0, 0}, 8, 0.0);
  DatasetId b = rt.declare("b", core, {0, 0, 0}, 8,
                           [](Point q) { return 1.0 + 0.0001 * (q[0] + 2 * q[1]); });
  DatasetId c2 = rt.declare("c2", core, {0, 0, 0}, 8, 0.9);
  DatasetId d3 = rt.declare("d3", core, {0, 0, 0}, 8, 0.05);
  if (p.cyclic) rt.set_cyclic_flag(true);

  const Stencil pt = Stencil::point();
  const Stencil s5 = Stencil::star(2, 1);
  const double alpha[3] = {1.0 / 3.0, 0.5, 1.0};
  const double beta[3] = {0.0, -0.6, -0.85};
  using namespace ex;

  int done = 0;
  while (done < p.iters) {
    const int steps = std::min(span, p.iters - done);
    for (int tau = 0; tau < steps; ++tau) {
      for (int sigma = 0; sigma < 3; ++sigma) {
        const index_t depth = 3 * static_cast<index_t>(steps - 1 - tau) + (2 - sigma);
        const Extent range = Extent::rect(-depth, p.nx + depth, -depth, p.ny + depth);

        rt.enqueue_loop(make_loop(range,
                                  {{w, s5, AccessMode::read},
                                   {b, pt, AccessMode::read},
                                   {r_, pt, AccessMode::write}},
                                  write_expr(2, mul(star5(0), r(1, 0, 0)))));
        if (sigma == 0) {
          rt.enqueue_loop(make_loop(range,
                                    {{r_, pt, AccessMode::read},
                                     {c2, pt, AccessMode::read},
                                     {k_, pt, AccessMode::write}},
                                    write_expr(2, mul(r(0, 0, 0), r(1, 0, 0)))));
        } else {
          rt.enqueue_loop(make_loop(range,
                                    {{r_, pt, AccessMode::read},
                                     {c2, pt, AccessMode::read},
                                     {k_, pt, AccessMode::read_write}},
                                    write_expr(2, add(mul(c(beta[sigma]), r(2, 0, 0)),
                                                      mul(r(0, 0, 0), r(1, 0, 0))))));
        }
        rt.enqueue_loop(make_loop(
            range,
            {{w, pt, AccessMode::read_write}, {k_, pt, AccessMode::read}, {d3, pt, AccessMode::read}},
            write_expr(0, add(r(0, 0, 0), mul(c(alpha[sigma]), mul(r(1, 0, 0), r(2, 0, 0)))))));
      }
    }
    done += steps;
    rt.flush();
  }
  rt.finish();
}

}  // namespace

std::vector<std::string> app_names() { return {"heat2d", "miniflow2d", "rk3chain"}; }

void run_app(Runtime& rt, const AppParams& params) {
  if (params.name == "heat2d")
    run_heat2d(rt, params);
  else if (params.name == "miniflow2d")
    run_miniflow2d(rt, params);
  else if (params.name == "rk3chain")
    run_rk3chain(rt, params);
  else
    throw ValidationError("unknown app '" + params.name + "'");
}

index_t app_problem_bytes(const AppParams& params) {
  Runtime probe;
  AppParams p = params;
  p.iters = 0;
  run_app(probe, p);
  index_t bytes = 0;
  for (const auto& ds : probe.mesh().datasets) bytes += ds.alloc().size() * ds.elem_bytes;
  return bytes;
}

double app_baseline_bandwidth(const AppParams& params, const RuntimeOptions& opts) {
  RuntimeOptions base = opts;
  base.tiles = 1;
  base.prefetch = false;
  base.device.capacity_bytes = std::max<index_t>(4 * app_problem_bytes(params), 1 << 20);
  AppParams p = params;
  p.cyclic = false;
  Runtime rt(base);
  run_app(rt, p);
  // a resident run's loops never wait on the interconnect: count only the
  // time the kernels themselves occupy the device
  index_t bytes = 0;
  double busy = 0.0;
  for (const auto& e : rt.timeline_entries())
    if (e.kind == CmdKind::kernel) {
      bytes += e.bytes;
      busy += e.end - e.start;
    }
  return busy > 0 ? static_cast<double>(bytes) / busy : rt.report().average_bandwidth;
}

std::string scaling_sweep(const AppParams& base_params,
                          const std::vector<std::pair<index_t, index_t>>& sizes,
                          const std::vector<ExecutorKind>& modes, const RuntimeOptions& base_opts,
                          double capacity_ratio) {
  std::ostringstream os;
  os << report_csv_header();
  for (const auto& [nx, ny] : sizes)
    for (ExecutorKind mode : modes) {
      AppParams p = base_params;
      p.nx = nx;
      p.ny = ny;
      RuntimeOptions opts = base_opts;
      opts.executor = mode;
      if (capacity_ratio > 0)
        opts.device.capacity_bytes =
            static_cast<index_t>(static_cast<double>(app_problem_bytes(p)) / capacity_ratio);
      RunReport rep;
      rep.app = p.name;
      rep.size = std::to_string(nx) + "x" + std::to_string(ny);
      rep.iters = p.iters;
      rep.mode = executor_name(mode);
      rep.capacity = opts.device.capacity_bytes;
      try {
        Runtime rt(opts);
        run_app(rt, p);
        RunReport full = rt.report();
        full.app = rep.app;
        full.size = rep.size;
        full.iters = rep.iters;
        rep = full;
      } catch (const std::exception& ex) {
        std::string what = ex.what();
        for (char& ch : what)
          if (ch == ',' || ch == '\n') ch = ';';
        rep.error = what;
      }
      os << report_csv_row(rep);
    }
  return os.str();
}

}  // namespace ooc
