#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "terramap/app/config.hpp"
#include "terramap/eval/metrics.hpp"

namespace terramap::app {

namespace fs = std::filesystem;

struct InitialEstimate {
  NominalState state;
  CovarianceMatrix cov;
};

/// Filter prior: ground-truth pose and velocity at the first tick, gravity
/// and gyroscope bias from the standing IMU segment, feet from the first leg
/// reading. Throws InitializationError if the robot moves during the window.
InitialEstimate initial_estimate(const simkit::SensorLog& log, const RunConfig& cfg);

using FrameCallback = std::function<void(const estimator::FrameResult&)>;

struct EstimationRun {
  Trajectory est;  ///< initial state, then one pose per scan
  Trajectory gt;   ///< ground truth at the same stamps
  StageTimes timings;
};

EstimationRun run_estimation(const RunConfig& cfg, const simkit::SensorLog& log,
                             const FrameCallback& on_frame = {});

/// Ego-centric height map fed with estimator frames.
class MapBuilder {
 public:
  MapBuilder(const RunConfig& cfg, const NominalState& initial);

  /// Moves the window to the frame pose, integrates the frame's points and
  /// re-extracts (and optionally interpolates) the heights.
  const elevmap::HeightGrid& update(const estimator::FrameResult& frame);

  const elevmap::VoxelGrid& grid() const { return grid_; }
  const elevmap::HeightGrid& heights() const { return heights_; }
  const StageTimes& timings() const { return timings_; }

 private:
  elevmap::OccupancyParams occupancy_;
  bool interpolate_;
  double endpoint_extension_;
  std::vector<Vec3> points_;
  elevmap::VoxelGrid grid_;
  elevmap::HeightGrid heights_;
  StageTimes timings_;
};

/// Writes the sensor log and manifest; returns the digested files.
std::vector<fs::path> cmd_simulate(const RunConfig& cfg, const fs::path& out);

struct RunResult {
  eval::MetricsReport metrics;
  std::vector<fs::path> files;  ///< relative to the output directory
};

/// Simulate, estimate, map, score rewards and evaluate; writes every artifact
/// and the manifest into out.
RunResult cmd_run(const RunConfig& cfg, const fs::path& out);

eval::MetricsReport cmd_evaluate(const fs::path& est, const fs::path& gt, bool align,
                                 double rpe_delta);

struct BenchOptions {
  int scans = 100;
  int points = 20000;
};

/// Map-update timing over synthetic scans along the configured walk. Stages:
/// integrate_scan, extract_heights, interpolate and their sum, map_update.
std::map<std::string, eval::Percentiles> cmd_bench(const RunConfig& cfg, const BenchOptions& opt);

std::string sha256_file(const fs::path& file);

/// manifest.json: tool version, seed, merged config and a SHA-256 digest per
/// listed file (paths relative to dir).
void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::vector<fs::path>& files);

std::string_view tool_version();

}  // namespace terramap::app
