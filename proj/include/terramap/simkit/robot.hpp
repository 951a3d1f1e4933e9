#pragma once

#include <array>
#include <vector>

#include "terramap/rewards/snapshot.hpp"
#include "terramap/simkit/gait.hpp"

namespace terramap::simkit {

/// Three-joint leg: abduction about body x, then hip and knee pitch with
/// thigh and calf links hanging down in the abducted plane.
struct LegGeometry {
  double thigh = 0.2;
  double calf = 0.2;
};

/// Joint angles (abduction, hip, knee) placing the foot at `foot` relative to
/// the hip, body frame. Out-of-reach targets are clamped to full extension.
Eigen::Vector3d leg_ik(const Vec3& foot, const LegGeometry& leg = {});
Vec3 leg_fk(const Eigen::Vector3d& q, const LegGeometry& leg = {});

struct SnapshotParams {
  double dt = 0.02;  ///< control tick
  double mass = 12.0;
  double gravity = 9.81;
  LegGeometry leg;
};

/// Reward snapshots at ticks k * dt for t in [0, t_end], with air time
/// accumulated tick by tick. The kinematic simulator has no actuator or
/// collision model: torques and collision counts stay zero and stance feet
/// carry an equal share of the weight vertically.
std::vector<rewards::RobotSnapshot> robot_snapshots(const Motion& motion, double t_end,
                                                    const SnapshotParams& params = {});

}  // namespace terramap::simkit
