#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ooc/apps.hpp"
#include "ooc/chain_file.hpp"
#include "ooc/metrics.hpp"
#include "ooc/runtime.hpp"

namespace {

struct CliConfig {
  std::string app = "heat2d";
  std::string size = "64x64";
  int iters = 10;
  std::string mode = "explicit";
  std::string tiles = "auto";
  double capacity = 16e9;
  double capacity_ratio = 0.0;
  double h2d = 16e9, d2h = 16e9, d2d = 510e9, devbw = 510e9;
  double latency = 1e-6;
  double page_bytes = 65536;
  double fault_latency = 50e-6;
  double prefetch_bw = 0.0;  // 0: follow h2d
  double prefetch_degradation = 1.0;
  std::string profile;
  bool cyclic = false;
  bool prefetch = false;
  int tile_span = 0;
  std::string chain_file;
  std::string out_dir;
  bool verify = false;
  std::string sweep;
  std::string sweep_modes = "cache,explicit";
  bool dump_plan = false;
  bool no_baseline = false;
  bool serial_kernels = false;
};

std::pair<ooc::index_t, ooc::index_t> parse_size(const std::string& s) {
  ooc::index_t nx = 0, ny = 0;
  char sep = 0;
  std::istringstream is(s);
  if (!(is >> nx)) throw ooc::ValidationError("bad --size '" + s + "'");
  if (is >> sep >> ny) {
    if (sep != 'x') throw ooc::ValidationError("bad --size '" + s + "'");
  } else {
    ny = nx;
  }
  ooc::index_t rest;
  if (is >> sep >> rest) throw ooc::ValidationError("3-D sizes are not supported by the apps");
  return {nx, ny};
}

ooc::ExecutorKind parse_mode(const std::string& m) {
  if (m == "reference") return ooc::ExecutorKind::reference;
  if (m == "explicit") return ooc::ExecutorKind::tiled_explicit;
  if (m == "cache") return ooc::ExecutorKind::tiled_cache;
  if (m == "unified") return ooc::ExecutorKind::unified;
  throw ooc::ValidationError("unknown mode '" + m + "'");
}

void apply_config_file(CliConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ooc::ValidationError("cannot open config file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in);
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j[key].template get<std::decay_t<decltype(slot)>>();
  };
  get("app", cfg.app);
  get("size", cfg.size);
  get("iters", cfg.iters);
  get("mode", cfg.mode);
  get("tiles", cfg.tiles);
  get("capacity", cfg.capacity);
  get("capacity_ratio", cfg.capacity_ratio);
  get("h2d", cfg.h2d);
  get("d2h", cfg.d2h);
  get("d2d", cfg.d2d);
  get("devbw", cfg.devbw);
  get("latency", cfg.latency);
  get("page_bytes", cfg.page_bytes);
  get("fault_latency", cfg.fault_latency);
  get("prefetch_bw", cfg.prefetch_bw);
  get("prefetch_degradation", cfg.prefetch_degradation);
  get("profile", cfg.profile);
  get("cyclic", cfg.cyclic);
  get("prefetch", cfg.prefetch);
  get("tile_span", cfg.tile_span);
  get("chain_file", cfg.chain_file);
  get("out", cfg.out_dir);
  get("verify", cfg.verify);
  get("sweep", cfg.sweep);
  get("sweep_modes", cfg.sweep_modes);
  get("serial_kernels", cfg.serial_kernels);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name);
  out << content;
}

int run(const CliConfig& cfg) {
  using namespace ooc;

  RuntimeOptions opts;
  opts.executor = parse_mode(cfg.mode);
  if (cfg.profile == "nvlink")
    opts.device = DeviceConfig::nvlink();
  else if (cfg.profile == "pcie" || cfg.profile.empty())
    opts.device = DeviceConfig::pcie();
  else
    throw ValidationError("unknown profile '" + cfg.profile + "'");
  if (cfg.profile.empty()) {
    opts.device.h2d_bandwidth = cfg.h2d;
    opts.device.d2h_bandwidth = cfg.d2h;
    opts.device.prefetch_bandwidth = cfg.prefetch_bw > 0 ? cfg.prefetch_bw : cfg.h2d;
  } else if (cfg.prefetch_bw > 0) {
    opts.device.prefetch_bandwidth = cfg.prefetch_bw;
  }
  opts.device.d2d_bandwidth = cfg.d2d;
  opts.device.device_kernel_bandwidth = cfg.devbw;
  opts.device.transfer_latency = cfg.latency;
  opts.device.capacity_bytes = static_cast<index_t>(cfg.capacity);
  opts.device.cache_page_bytes = static_cast<index_t>(cfg.page_bytes);
  opts.device.fault_latency = cfg.fault_latency;
  opts.device.prefetch_degradation = cfg.prefetch_degradation;
  opts.prefetch = cfg.prefetch;
  opts.policy = cfg.serial_kernels ? ExecPolicy::serial : default_exec_policy();
  if (cfg.tiles != "auto") opts.tiles = std::stoi(cfg.tiles);

  AppParams params;
  params.name = cfg.app;
  std::tie(params.nx, params.ny) = parse_size(cfg.size);
  params.iters = cfg.iters;
  params.tile_span = cfg.tile_span;
  params.cyclic = cfg.cyclic;

  if (cfg.capacity_ratio > 0) {
    index_t problem = app_problem_bytes(params);
    opts.device.capacity_bytes =
        static_cast<index_t>(static_cast<double>(problem) / cfg.capacity_ratio);
  }

  if (!cfg.sweep.empty()) {
    std::vector<std::pair<index_t, index_t>> sizes;
    for (const auto& s : split_list(cfg.sweep)) sizes.push_back(parse_size(s));
    std::vector<ExecutorKind> modes;
    for (const auto& m : split_list(cfg.sweep_modes)) modes.push_back(parse_mode(m));
    std::string csv = scaling_sweep(params, sizes, modes, opts, cfg.capacity_ratio);
    if (cfg.out_dir.empty())
      std::cout << csv;
    else
      write_file(cfg.out_dir, "sweep.csv", csv);
    return 0;
  }

  Runtime rt(opts);
  if (!cfg.chain_file.empty()) {
    load_chain_file(rt, cfg.chain_file);
    rt.finish();
  } else {
    run_app(rt, params);
  }

  int exit_code = 0;
  if (cfg.verify) {
    RuntimeOptions ref_opts;
    ref_opts.executor = ExecutorKind::reference;
    ref_opts.policy = opts.policy;
    Runtime ref(ref_opts);
    if (!cfg.chain_file.empty()) {
      load_chain_file(ref, cfg.chain_file);
      ref.finish();
    } else {
      run_app(ref, params);
    }
    for (size_t d = 0; d < rt.mesh().datasets.size(); ++d) {
      const Dataset& got = rt.mesh().datasets[d];
      const Dataset& want = ref.mesh().datasets[d];
      if (got.host_stale) continue;  // discarded by request
      if (std::memcmp(got.host.data(), want.host.data(), got.host.size() * sizeof(double)) != 0) {
        std::cerr << "verify: dataset '" << got.name << "' differs from the reference run\n";
        exit_code = 1;
      }
    }
    if (exit_code == 0) std::cerr << "verify: all buffers match the reference run\n";
  }

  RunReport rep = rt.report();
  rep.app = cfg.chain_file.empty() ? params.name : cfg.chain_file;
  rep.size = std::to_string(params.nx) + "x" + std::to_string(params.ny);
  rep.iters = params.iters;
  if (!cfg.no_baseline && cfg.chain_file.empty() &&
      opts.executor != ExecutorKind::reference) {
    double base = app_baseline_bandwidth(params, opts);
    if (base > 0) rep.efficiency = rep.average_bandwidth / base;
  }

  std::cout << report_csv_header() << report_csv_row(rep);

  if (!cfg.out_dir.empty()) {
    write_file(cfg.out_dir, "report.csv", report_csv_header() + report_csv_row(rep));
    write_file(cfg.out_dir, "loops.csv", loops_csv(rt.loop_metrics()));
    Timeline tl;
    tl.entries = rt.timeline_entries();
    write_file(cfg.out_dir, "timeline.csv", timeline_csv(tl));
    write_file(cfg.out_dir, "audit.csv", audit_csv(rt.mesh(), rt.audit_rows()));
  }

  if (cfg.dump_plan && rt.last_chain()) {
    const auto& entry =
        rt.plan_cache().get(rt.mesh(), *rt.last_chain(), rt.last_tile_count(), opts.tiled_dim);
    std::cout << plan_dump_text(rt.mesh(), *rt.last_chain(), entry.plan, entry.footprints);
    if (!cfg.out_dir.empty())
      write_file(cfg.out_dir, "plan.json",
                 plan_dump_json(rt.mesh(), *rt.last_chain(), entry.plan, entry.footprints));
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig cfg;
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  CLI::App app{"out-of-core stencil runtime simulator"};
  app.add_option("--config", config_path, "JSON config mirroring all flags");
  app.add_option("--app", cfg.app, "heat2d | miniflow2d | rk3chain");
  app.add_option("--size", cfg.size, "grid size NxM");
  app.add_option("--iters", cfg.iters, "iterations / timesteps");
  app.add_option("--mode", cfg.mode, "reference | explicit | cache | unified");
  app.add_option("--tiles", cfg.tiles, "tile count or 'auto'");
  app.add_option("--capacity", cfg.capacity, "fast-memory bytes");
  app.add_option("--capacity-ratio", cfg.capacity_ratio,
                 "set capacity to problem_bytes / R (overrides --capacity)");
  app.add_option("--h2d", cfg.h2d, "host-to-device bytes/s");
  app.add_option("--d2h", cfg.d2h, "device-to-host bytes/s");
  app.add_option("--d2d", cfg.d2d, "device-to-device bytes/s");
  app.add_option("--devbw", cfg.devbw, "device kernel bytes/s");
  app.add_option("--latency", cfg.latency, "per-transfer latency seconds");
  app.add_option("--page-bytes", cfg.page_bytes, "cache/unified page size");
  app.add_option("--fault-latency", cfg.fault_latency, "unified page-fault latency seconds");
  app.add_option("--prefetch-bw", cfg.prefetch_bw, "prefetch bytes/s (default: h2d)");
  app.add_option("--prefetch-degradation", cfg.prefetch_degradation,
                 "prefetch bandwidth multiplier when oversubscribed");
  app.add_option("--profile", cfg.profile, "pcie | nvlink bandwidth profile");
  app.add_flag("--cyclic", cfg.cyclic, "discard write-first temporaries between chains");
  app.add_flag("--prefetch", cfg.prefetch, "speculative prefetch across chains / tiles");
  app.add_option("--tile-span", cfg.tile_span, "iterations (or timesteps) per chain");
  app.add_option("--chain-file", cfg.chain_file, "run a chain-description JSON file");
  app.add_option("--out", cfg.out_dir, "directory for report/loops/timeline/audit CSVs");
  app.add_flag("--verify", cfg.verify, "compare buffers against the reference executor");
  app.add_option("--sweep", cfg.sweep, "comma-separated sizes: run one report row each");
  app.add_option("--sweep-modes", cfg.sweep_modes, "modes for --sweep");
  app.add_flag("--dump-plan", cfg.dump_plan, "print the last chain's tile plan");
  app.add_flag("--no-baseline", cfg.no_baseline, "skip the efficiency baseline run");
  app.add_flag("--serial-kernels", cfg.serial_kernels, "disable OpenMP kernel execution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return run(cfg);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
