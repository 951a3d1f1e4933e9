#include "terramap/simkit/robot.hpp"

#include <algorithm>
#include <cmath>

namespace terramap::simkit {

Eigen::Vector3d leg_ik(const Vec3& foot, const LegGeometry& leg) {
  const double l1 = leg.thigh;
  const double l2 = leg.calf;
  const double abd = std::atan2(foot.y(), -foot.z());
  const double r = std::hypot(foot.y(), foot.z());
  const double x = foot.x();
  const double d2 = std::clamp(x * x + r * r, (l1 - l2) * (l1 - l2), (l1 + l2) * (l1 + l2));
  const double ck = std::clamp((d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double knee = -std::acos(ck);
  const double hip =
      std::atan2(-x, r) - std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));
  return {abd, hip, knee};
}

Vec3 leg_fk(const Eigen::Vector3d& q, const LegGeometry& leg) {
  const double x = -(leg.thigh * std::sin(q[1]) + leg.calf * std::sin(q[1] + q[2]));
  const double r = leg.thigh * std::cos(q[1]) + leg.calf * std::cos(q[1] + q[2]);
  return {x, r * std::sin(q[0]), -r * std::cos(q[0])};
}

namespace {

rewards::JointVector joints(const Motion& m, const PoseSample& p, double t, const LegGeometry& leg) {
  rewards::JointVector q;
  for (int i = 0; i < kNumFeet; ++i) {
    const Vec3 rel = p.rot.transpose() * (m.foot(i, t) - p.pos) - m.gait().hip[i];
    q.segment<3>(3 * i) = leg_ik(rel, leg);
  }
  return q;
}

}  // namespace

std::vector<rewards::RobotSnapshot> robot_snapshots(const Motion& motion, double t_end,
                                                    const SnapshotParams& params) {
  const double dt = params.dt;
  const long n = static_cast<long>(std::floor(t_end / dt + 1e-9));
  const auto& path = motion.path();
  const double ground = motion.pose(0.0).pos.z() - motion.gait().base_height;

  const rewards::JointVector q0 = joints(motion, motion.pose(0.0), 0.0, params.leg);
  rewards::JointVector q_prev = q0;
  rewards::JointVector dq_prev = rewards::JointVector::Zero();
  rewards::JointVector a_prev = q0;
  std::array<double, kNumFeet> air{};

  std::vector<rewards::RobotSnapshot> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const PoseSample p = motion.pose(t);
    const Mat3 rt = p.rot.transpose();

    rewards::RobotSnapshot s;
    if (path.moving() && t >= path.start_time && t < path.start_time + path.walk_duration()) {
      s.command_lin = Vec3(path.speed, 0.0, 0.0);
    }
    s.lin_vel = rt * p.vel;
    s.ang_vel = p.ang_vel;
    s.projected_gravity = rt * Vec3(0.0, 0.0, -1.0);
    s.orientation_xy = s.projected_gravity.head<2>();
    s.base_height = p.pos.z() - ground;

    s.q = joints(motion, p, t, params.leg);
    s.dq = k == 0 ? rewards::JointVector::Zero() : rewards::JointVector((s.q - q_prev) / dt);
    s.ddq = k == 0 ? rewards::JointVector::Zero() : rewards::JointVector((s.dq - dq_prev) / dt);
    s.action = s.q;
    s.last_action = a_prev;
    s.default_q = q0;

    int stance = 0;
    for (int i = 0; i < kNumFeet; ++i) stance += motion.contact(i, t) ? 1 : 0;
    for (int i = 0; i < kNumFeet; ++i) {
      const bool c = motion.contact(i, t);
      s.contact[i] = c;
      s.foot_pos[i] = motion.foot(i, t);
      s.foot_force[i] =
          c ? Vec3(0.0, 0.0, params.mass * params.gravity / stance) : Vec3::Zero();
      if (k == 0) {
        s.air_time[i] = 0.0;
      } else if (c) {
        s.air_time[i] = air[i] > 0.0 ? air[i] + dt : 0.0;
        air[i] = 0.0;
      } else {
        air[i] += dt;
        s.air_time[i] = air[i];
      }
    }
    q_prev = s.q;
    dq_prev = s.dq;
    a_prev = s.action;
    out.push_back(s);
  }
  return out;
}

}  // namespace terramap::simkit
