// rbtwin: roundabout digital-twin co-simulator.
//
//   rbtwin run <config> [--seed N] [--out DIR] [--overwrite] [--trace]
//   rbtwin sweep <config> [--out DIR] [--overwrite]
//   rbtwin fidelity <pt_trace> <dt_trace> [--bin SECONDS]
//   rbtwin validate <config>
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.
// RBTWIN_LOG_LEVEL overrides the configured log level.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rbtwin/dt/fidelity.hpp"
#include "rbtwin/scenario/runner.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

void set_log_level(const std::string& configured) {
  const char* env = std::getenv("RBTWIN_LOG_LEVEL");
  spdlog::set_level(spdlog::level::from_str(env && *env ? env : configured));
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("rbtwin"));
  spdlog::set_pattern("[%l] %v");
  set_log_level("info");

  CLI::App app{"Roundabout digital-twin co-simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, pt_path, dt_path;
  std::uint64_t seed = 0;
  bool overwrite = false, trace = false;
  double bin = 60.0;

  auto* run = app.add_subcommand("run", "Run one seeded scenario and write its CSV artifacts");
  run->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Seed replacing traffic.seed");
  run->add_option("--out", out_dir, "Output directory (default: output_dir from the config)");
  run->add_flag("--overwrite", overwrite, "Replace the contents of a non-empty output directory");
  run->add_flag("--trace", trace, "Also write pt_trace.csv and dt_trace.csv");

  auto* sweep = app.add_subcommand("sweep", "Run the sweep grid and write sweep.csv and sweep_summary.csv");
  sweep->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory (default: output_dir from the config)");
  sweep->add_flag("--overwrite", overwrite, "Replace the contents of a non-empty output directory");

  auto* fidelity = app.add_subcommand("fidelity", "Compare the mean speeds of two detection traces");
  fidelity->add_option("pt_trace", pt_path, "Ground-truth trace")->required()->check(CLI::ExistingFile);
  fidelity->add_option("dt_trace", dt_path, "Mirrored trace")->required()->check(CLI::ExistingFile);
  fidelity->add_option("--bin", bin, "Bin width in seconds")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a scenario config and print its normalized form");
  validate->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*fidelity) {
      const auto result = rbtwin::dt::compute_fidelity(rbtwin::dt::load_trace(pt_path),
                                                       rbtwin::dt::load_trace(dt_path), bin);
      std::cout << "t_start,pt_mean,dt_mean,pt_count,dt_count,valid\n";
      for (const auto& b : result.bins)
        std::cout << rbtwin::format_double(b.t_start) << ',' << rbtwin::format_double(b.pt_mean) << ','
                  << rbtwin::format_double(b.dt_mean) << ',' << b.pt_count << ',' << b.dt_count << ','
                  << (b.valid ? 1 : 0) << '\n';
      std::cout << "# rmse=" << rbtwin::format_double(result.rmse) << " bins_used=" << result.bins_used
                << " bins_empty=" << result.bins_empty << '\n';
      return 0;
    }

    const auto config = rbtwin::scenario::load_config(config_path);
    set_log_level(config.log_level);
    if (out_dir.empty()) out_dir = config.output_dir;

    if (*validate) {
      std::cout << rbtwin::scenario::serialize_config(config);
      return 0;
    }
    if (*run) {
      const auto s = seed_opt->count() ? seed : config.seed();
      spdlog::info("run {} seed={} duration={}s -> {}", config_path, s, config.duration, out_dir);
      const auto summary = rbtwin::scenario::run_scenario(config, s, out_dir, overwrite, trace);
      spdlog::info("avg_waiting={} spawned={} exited={} cycles={} ({:.2f}s wall)", summary.avg_waiting,
                   summary.spawned, summary.exited, summary.cycles, summary.wall_seconds);
      for (const auto& n : summary.network)
        spdlog::info("{:<12} f_max={:<4} N_of={} N_re={} R_oc={:.3f} p_of={:.4f} p_re={:.4f} y={:.4f}", n.policy,
                     n.f_max, n.n_of_events, n.n_re, n.r_oc, n.p_of, n.p_re, n.y);
      return 0;
    }
    if (*sweep) {
      spdlog::info("sweep {} -> {}", config_path, out_dir);
      const auto result = rbtwin::scenario::run_sweep(config, out_dir, overwrite);
      spdlog::info("{} rows, {} cells", result.rows.size(), result.aggregates.size());
      return 0;
    }
  } catch (const rbtwin::ConfigError& e) {
    spdlog::error("config error at {}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeError;
  }
  return 0;
}
