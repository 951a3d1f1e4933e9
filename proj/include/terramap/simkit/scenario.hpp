#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "terramap/simkit/gait.hpp"
#include "terramap/simkit/sensors.hpp"
#include "terramap/simkit/terrain.hpp"
#include "terramap/trajectory.hpp"

namespace terramap::simkit {

struct ScenarioConfig {
  TerrainSpec terrain;
  GaitParams gait;
  PathCommand path;
  SensorModel sensors;
  double duration = 10.0;
  std::uint64_t seed = 0;
  double terrain_resolution = 0.05;  ///< height-field export
};

struct Scan {
  double t = 0.0;
  long index = 0;
  estimator::PointCloud points;  ///< sensor frame
};

struct SensorLog {
  std::vector<estimator::ImuSample> imu;
  std::vector<Scan> scans;
  std::vector<estimator::FootMeasurement> feet;
  /// Ground-truth base pose at every IMU tick.
  terramap::Trajectory ground_truth;
  std::vector<HeightSample> terrain;
};

/// Builds the motion for a scenario; throws like Motion's constructor.
Motion make_motion(const ScenarioConfig& cfg, const Terrain& terrain);

/// Synthesizes every stream. Scans are taken at multiples of the LiDAR period
/// after t = 0 and coincide with IMU ticks.
SensorLog run_scenario(const ScenarioConfig& cfg);

/// Writes imu.csv, feet.csv, gt.tum, terrain.csv and scans/NNNN.csv; returns
/// the files written, relative to dir.
std::vector<std::filesystem::path> write_sensor_log(const SensorLog& log,
                                                    const std::filesystem::path& dir);
SensorLog read_sensor_log(const std::filesystem::path& dir);

}  // namespace terramap::simkit
