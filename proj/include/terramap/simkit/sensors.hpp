#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "terramap/estimator/types.hpp"
#include "terramap/simkit/gait.hpp"
#include "terramap/simkit/terrain.hpp"

namespace terramap::simkit {

struct SensorModel {
  double imu_rate = 200.0;
  double lidar_rate = 10.0;
  int rays_per_scan = 4000;
  /// Sensor-frame elevation band of the dome pattern [deg].
  double elevation_min = -60.0;
  double elevation_max = 30.0;
  /// The pattern repeats after this many scans.
  int pattern_period = 20;
  double min_range = 0.2;
  double max_range = 40.0;
  double range_noise = 0.02;  ///< m, 1 sigma

  double gyro_noise = 1e-3;       ///< rad/s/sqrt(Hz)
  double accel_noise = 1e-2;      ///< m/s^2/sqrt(Hz)
  double gyro_bias_walk = 1e-5;   ///< rad/s^2/sqrt(Hz)
  double accel_bias_walk = 1e-4;  ///< m/s^3/sqrt(Hz)
  Vec3 gyro_bias = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  double gravity = 9.81;

  double foot_pos_noise = 0.005;  ///< m, 1 sigma per axis
  double foot_vel_noise = 0.02;   ///< m/s, 1 sigma per axis

  estimator::Extrinsics extrinsics{Rotation::Identity(), Vec3(0.25, 0.0, 0.10)};

  /// Zeroes every noise and bias term.
  SensorModel noiseless() const;
  /// Throws InvalidInput unless rates are positive, the LiDAR rate divides the
  /// IMU rate and ranges are ordered.
  void validate() const;
  int imu_ticks_per_scan() const;
};

/// Independent, reproducible random stream per sensor.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

using PoseFunction = std::function<PoseSample(double)>;

/// Motion as the filter's discrete model sees it between two IMU ticks:
/// p_{k+1} = p_k + v_k dt and R_{k+1} = R_k Exp(omega_k dt).
struct DiscreteMotion {
  Rotation rot;
  Vec3 pos;
  Vec3 vel;    ///< secant velocity (p_{k+1} - p_k) / dt
  Vec3 omega;  ///< body rate, Log(R_k^T R_{k+1}) / dt
};

DiscreteMotion discrete_motion(const PoseFunction& pose, double t, double dt);

/// IMU samples at k / imu_rate for t in [0, t_end]. Noise-free samples make
/// the explicit propagation reproduce the sampled poses up to round-off.
std::vector<estimator::ImuSample> synth_imu(const PoseFunction& pose, double t_end,
                                            const SensorModel& sm, std::uint64_t seed);

/// Sensor-frame unit ray directions of scan `index`.
std::vector<Vec3> scan_pattern(const SensorModel& sm, long index);

/// One scan at the given body pose; misses are omitted.
estimator::PointCloud synth_lidar(const Rotation& rot, const Vec3& pos, const Terrain& terrain,
                                  const SensorModel& sm, long index, std::mt19937_64& rng);

/// Leg readings at every IMU tick. Stance readings satisfy the no-slip and
/// contact-position residuals exactly at the discrete ground truth.
std::vector<estimator::FootMeasurement> synth_kinematics(const Motion& traj, double t_end,
                                                         const SensorModel& sm,
                                                         std::uint64_t seed);

}  // namespace terramap::simkit
