#pragma once

#include <array>
#include <vector>

#include "terramap/manifold.hpp"

namespace terramap::estimator {

struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   ///< omega_m [rad/s], body frame
  Vec3 accel = Vec3::Zero();  ///< a_m [m/s^2], specific force in body frame
};

/// Leg-odometry reading for one foot, expressed in the body frame.
///
/// p_rel follows the convention p_rel = R_wb^T (p_wb - p_foot). v_rel is the
/// companion rate for which a non-slipping stance foot satisfies
///   v_wb + R_wb (v_rel + omega x p_rel) = 0.
/// With b = -p_rel the body-frame foot position and b_dot its rate of change,
/// that is v_rel = b_dot + 2 omega x b.
struct FootReading {
  Vec3 p_rel = Vec3::Zero();
  Vec3 v_rel = Vec3::Zero();
  bool contact = false;
};

struct FootMeasurement {
  double t = 0.0;
  std::array<FootReading, kNumFeet> feet{};

  std::array<bool, kNumFeet> contacts() const {
    return {feet[0].contact, feet[1].contact, feet[2].contact, feet[3].contact};
  }
};

struct PlaneTarget {
  Vec3 normal = Vec3::UnitZ();  ///< unit normal u_j
  Vec3 anchor = Vec3::Zero();   ///< point q_j on the plane, world frame
  bool valid = false;
};

/// Continuous-time noise densities and measurement covariances.
struct NoiseConfig {
  double gyro_noise = 1e-3;        ///< rad/s/sqrt(Hz)
  double accel_noise = 1e-2;       ///< m/s^2/sqrt(Hz)
  double gyro_bias_walk = 1e-5;    ///< rad/s^2/sqrt(Hz)
  double accel_bias_walk = 1e-4;   ///< m/s^3/sqrt(Hz)
  double foot_stance_noise = 1e-4; ///< m/sqrt(s)
  double foot_swing_noise = 1.0;   ///< m/sqrt(s)
  double lidar_variance = 0.02 * 0.02;        ///< m^2 per point
  double contact_vel_variance = 0.05 * 0.05;  ///< (m/s)^2 per axis
  double contact_pos_variance = 0.01 * 0.01;  ///< m^2 per axis

  /// Throws InvalidInput when a variance is non-positive or the swing/stance
  /// ratio is below 100.
  void validate() const;
};

/// LiDAR-to-body transform: p_body = rot * p_lidar + trans.
struct Extrinsics {
  Rotation rot = Rotation::Identity();
  Vec3 trans = Vec3::Zero();
};

using PointCloud = std::vector<Vec3>;

}  // namespace terramap::estimator
