#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "terramap/app/runner.hpp"
#include "terramap/error.hpp"

using namespace terramap;
using namespace terramap::app;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("terramap");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("TERRAMAP_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("TERRAMAP_LOG: unknown level '{}', keeping info", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool no_kinematics = false;
  bool no_sor = false;
  bool no_interp = false;
  bool align = false;
};

RunConfig resolve(const CommonFlags& f) {
  Json doc = load_document(f.config ? std::optional<fs::path>(*f.config) : std::nullopt);
  if (f.seed) doc["seed"] = *f.seed;
  if (f.out) doc["output"] = *f.out;
  if (f.no_kinematics) doc["features"]["kinematics"] = false;
  if (f.no_sor) doc["features"]["sor"] = false;
  if (f.no_interp) doc["features"]["interpolation"] = false;
  if (f.align) doc["evaluation"]["align"] = true;
  return parse_config(doc);
}

void write_or_print(const Json& j, const std::optional<std::string>& file) {
  if (file) {
    std::ofstream out(*file, std::ios::binary);
    if (!out) throw Error("cannot write '" + *file + "'");
    out << j.dump(2) << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Terrain mapping pipeline: simulate, estimate, map and evaluate."};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config merged over the defaults");
    sub->add_option("--seed", flags.seed, "Override the scenario seed");
    sub->add_option("--out", flags.out, "Output directory");
  };

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic sensor log");
  add_common(simulate);

  auto* run = app.add_subcommand("run", "Simulate, estimate, map, score and evaluate");
  add_common(run);
  run->add_flag("--no-kinematics", flags.no_kinematics, "Disable leg-kinematic residuals");
  run->add_flag("--no-sor", flags.no_sor, "Disable statistical outlier removal");
  run->add_flag("--no-interp", flags.no_interp, "Disable height-map interpolation");
  run->add_flag("--align", flags.align, "Rigidly align the estimate before APE");

  std::string est_path, gt_path;
  std::optional<std::string> metrics_out;
  double rpe_delta = 1.0;
  auto* evaluate = app.add_subcommand("evaluate", "Trajectory metrics for two TUM files");
  evaluate->add_option("est", est_path, "Estimated trajectory")->required();
  evaluate->add_option("gt", gt_path, "Ground-truth trajectory")->required();
  evaluate->add_flag("--align", flags.align, "Rigidly align the estimate before APE");
  evaluate->add_option("--rpe-delta", rpe_delta, "RPE time offset [s]")->check(CLI::PositiveNumber);
  evaluate->add_option("--out", metrics_out, "Write metrics here instead of stdout");

  BenchOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "Time map updates on synthetic scans");
  bench->add_option("--config", flags.config, "JSON config merged over the defaults");
  bench->add_option("--seed", flags.seed, "Override the scenario seed");
  bench->add_option("--out", flags.out, "Directory for timing.json");
  bench->add_option("--scans", bench_opt.scans, "Number of scans")->check(CLI::PositiveNumber);
  bench->add_option("--points", bench_opt.points, "Points per scan")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      const RunConfig cfg = resolve(flags);
      cmd_simulate(cfg, cfg.output);
    } else if (*run) {
      const RunConfig cfg = resolve(flags);
      const auto result = cmd_run(cfg, cfg.output);
      std::cout << eval::to_json(result.metrics).dump(2) << '\n';
    } else if (*evaluate) {
      write_or_print(eval::to_json(cmd_evaluate(est_path, gt_path, flags.align, rpe_delta)),
                     metrics_out);
    } else if (*bench) {
      const std::optional<std::string> out = flags.out;
      flags.out.reset();
      const RunConfig cfg = resolve(flags);
      Json j;
      j["scans"] = bench_opt.scans;
      j["points"] = bench_opt.points;
      j["timing"] = eval::to_json(cmd_bench(cfg, bench_opt));
      if (out) {
        fs::create_directories(*out);
        write_or_print(j, (fs::path(*out) / "timing.json").string());
      }
      std::cout << j.dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return 0;
}
