#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "terramap/elevmap/voxel_grid.hpp"
#include "terramap/estimator/pipeline.hpp"
#include "terramap/rewards/rewards.hpp"
#include "terramap/simkit/scenario.hpp"

namespace terramap::app {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Prior for the filter state at the first sample.
struct InitConfig {
  double gravity_window = 0.5;  ///< s of standing IMU data used for gravity
  double rot_variance = 1e-6;
  double pos_variance = 1e-6;
  double vel_variance = 1e-4;
  double accel_bias_variance = 1e-3;
  double gyro_bias_variance = 1e-6;
  double foot_variance = 1e-4;
  double gravity_variance = 1e-4;
};

struct FeatureToggles {
  bool kinematics = true;
  bool sor = true;
  bool interpolation = true;
};

struct EvalConfig {
  bool align = false;
  double rpe_delta = 1.0;
};

struct RunConfig {
  /// Merged document the fields below were read from.
  Json document;

  simkit::ScenarioConfig scenario;
  estimator::PipelineOptions pipeline;
  InitConfig init;
  elevmap::GridConfig grid;
  elevmap::OccupancyParams occupancy;
  elevmap::PolicyGridParams policy;
  /// Returns are moved this far along their ray before integration [m].
  double endpoint_extension = 0.001;
  rewards::RewardWeights weights;
  rewards::StencilParams stencil;
  double reward_dt = 0.02;
  FeatureToggles features;
  EvalConfig eval;
  std::string output = "out";
};

/// The published defaults document.
const Json& defaults_document();

/// Recursively overlays `overrides` on `base`. Every key of `overrides` must
/// exist in `base` with a compatible type; otherwise ConfigError names the
/// offending key path. Arrays are replaced whole.
Json merge_config(const Json& base, const Json& overrides);

/// Reads a merged document into typed settings. Throws ConfigError.
RunConfig parse_config(const Json& document);

/// Parses a JSON config file and merges it over the defaults. A missing path
/// means defaults only.
Json load_document(const std::optional<std::filesystem::path>& path);

}  // namespace terramap::app
