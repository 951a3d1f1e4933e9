#include "terramap/rewards/rewards.hpp"

#include <cmath>

#include "terramap/error.hpp"

namespace terramap::rewards {

void RobotSnapshot::validate() const {
  for (double t : air_time) {
    if (!(t >= 0.0)) throw InvalidInput("air time must be non-negative");
  }
  if (collisions < 0) throw InvalidInput("collision count must be non-negative");
}

FootPointClassification classify_foot_points(const Vec3& foot, const HeightLookup& terrain,
                                             const StencilParams& params) {
  const auto dropped = [&](double dx, double dy) {
    const double h = terrain(foot.x() + dx, foot.y() + dy) - foot.z();
    return h < params.drop ? 1 : 0;
  };
  const double a = params.d1;
  const double d = params.d2 / std::sqrt(2.0);

  FootPointClassification c;
  c.n1 = dropped(0.0, 0.0);
  c.n2 = dropped(a, 0.0) + dropped(0.0, a) + dropped(-a, 0.0) + dropped(0.0, -a);
  c.n3 = dropped(d, d) + dropped(-d, d) + dropped(-d, -d) + dropped(d, -d);
  return c;
}

FootClassifications classify_feet(const RobotSnapshot& s, const HeightLookup& terrain,
                                  const StencilParams& params) {
  FootClassifications out;
  for (int i = 0; i < kNumFeet; ++i) out[i] = classify_foot_points(s.foot_pos[i], terrain, params);
  return out;
}

double reward_feet_center(const std::array<bool, kNumFeet>& contact,
                          const FootClassifications& cls) {
  double sum = 0.0;
  for (int i = 0; i < kNumFeet; ++i) {
    if (contact[i]) sum += cls[i].n2 + 2 * cls[i].n3;
  }
  return sum;
}

double reward_feet_air_time(const std::array<double, kNumFeet>& air_time,
                            const std::array<bool, kNumFeet>& touchdown) {
  double sum = 0.0;
  for (int i = 0; i < kNumFeet; ++i) {
    if (touchdown[i]) sum += air_time[i] - 0.5;
  }
  return sum;
}

std::array<bool, kNumFeet> touchdown_flags(const RobotSnapshot& s) {
  std::array<bool, kNumFeet> out{};
  for (int i = 0; i < kNumFeet; ++i) out[i] = s.contact[i] && s.air_time[i] > 0.0;
  return out;
}

double reward_feet_stumble(const std::array<Vec3, kNumFeet>& force) {
  for (const auto& f : force) {
    if (f.head<2>().norm() > 4.0 * std::abs(f.z())) return 1.0;
  }
  return 0.0;
}

std::string_view term_name(Term t) {
  switch (t) {
    case Term::kLinVelTracking: return "lin_vel_tracking";
    case Term::kAngVelTracking: return "ang_vel_tracking";
    case Term::kLinVelZ: return "lin_vel_z";
    case Term::kAngVelXY: return "ang_vel_xy";
    case Term::kTorque: return "torque";
    case Term::kActionRate: return "action_rate";
    case Term::kJointAcc: return "joint_acc";
    case Term::kCollision: return "collision";
    case Term::kOrientation: return "orientation";
    case Term::kJointMotion: return "joint_motion";
    case Term::kFeetAirTime: return "feet_air_time";
    case Term::kFeetStumble: return "feet_stumble";
    case Term::kFeetCenter: return "feet_center";
  }
  return "unknown";
}

RewardBreakdown reward_total(const RobotSnapshot& s, const FootClassifications& cls,
                             const RewardWeights& weights) {
  RewardBreakdown b;
  auto set = [&](Term t, double v) { b.raw[static_cast<int>(t)] = v; };

  const double lin_err = (s.command_lin.head<2>() - s.lin_vel.head<2>()).squaredNorm();
  const double yaw_err = s.command_yaw_rate - s.ang_vel.z();
  set(Term::kLinVelTracking, std::exp(-4.0 * lin_err));
  set(Term::kAngVelTracking, std::exp(-4.0 * yaw_err * yaw_err));
  set(Term::kLinVelZ, s.lin_vel.z() * s.lin_vel.z());
  set(Term::kAngVelXY, s.ang_vel.head<2>().squaredNorm());
  set(Term::kTorque, s.torque.squaredNorm());
  set(Term::kActionRate, (s.action - s.last_action).squaredNorm());
  set(Term::kJointAcc, s.ddq.squaredNorm());
  set(Term::kCollision, -static_cast<double>(s.collisions));
  set(Term::kOrientation, s.orientation_xy.squaredNorm());
  set(Term::kJointMotion, (s.q - s.default_q).cwiseAbs().sum());
  set(Term::kFeetAirTime, reward_feet_air_time(s.air_time, touchdown_flags(s)));
  set(Term::kFeetStumble, reward_feet_stumble(s.foot_force));
  set(Term::kFeetCenter, reward_feet_center(s.contact, cls));

  for (int k = 0; k < kNumTerms; ++k) {
    b.weighted[k] = weights.w[k] * b.raw[k];
    b.total += b.weighted[k];
  }
  return b;
}

}  // namespace terramap::rewards
