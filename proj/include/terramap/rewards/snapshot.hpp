#pragma once

#include <array>

#include <Eigen/Core>

#include "terramap/manifold.hpp"

namespace terramap::rewards {

inline constexpr int kNumJoints = 12;
using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using Vec2 = Eigen::Vector2d;

/// Everything one control tick exposes to the reward terms, the observation
/// and the termination check. Velocities are expressed in the body frame.
struct RobotSnapshot {
  Vec3 command_lin = Vec3::Zero();  ///< v*, only x and y are tracked
  double command_yaw_rate = 0.0;    ///< w*_yaw

  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();
  Vec3 projected_gravity{0.0, 0.0, -1.0};

  JointVector q = JointVector::Zero();
  JointVector dq = JointVector::Zero();
  JointVector ddq = JointVector::Zero();
  JointVector torque = JointVector::Zero();
  JointVector action = JointVector::Zero();
  JointVector last_action = JointVector::Zero();
  JointVector default_q = JointVector::Zero();

  std::array<Vec3, kNumFeet> foot_force{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<bool, kNumFeet> contact{};
  /// Time since the foot last left the ground, accumulated up to and
  /// including this tick; still nonzero on the touchdown tick.
  std::array<double, kNumFeet> air_time{};
  std::array<Vec3, kNumFeet> foot_pos{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

  int collisions = 0;       ///< penalized thigh/calf contacts
  bool base_contact = false;  ///< trunk or hip touching the terrain
  Vec2 orientation_xy = Vec2::Zero();
  double base_height = 0.0;

  /// Throws InvalidInput on negative air times or a negative collision count.
  void validate() const;
};

}  // namespace terramap::rewards
