#include "terramap/rewards/termination.hpp"

#include <algorithm>

namespace terramap::rewards {

std::string_view reason_name(TerminationReason r) {
  switch (r) {
    case TerminationReason::kNone: return "none";
    case TerminationReason::kBodyCollision: return "body_collision";
    case TerminationReason::kFootBelowThreshold: return "foot_below_threshold";
    case TerminationReason::kTimeout: return "timeout";
  }
  return "unknown";
}

Termination termination_check(const RobotSnapshot& s, double trapped_time,
                              const TerminationParams& params) {
  if (s.base_contact) return {true, TerminationReason::kBodyCollision};
  for (const auto& p : s.foot_pos) {
    if (p.z() < params.foot_floor) return {true, TerminationReason::kFootBelowThreshold};
  }
  if (trapped_time >= params.trapped_limit) return {true, TerminationReason::kTimeout};
  return {};
}

void TrapMonitor::reset() {
  samples_.clear();
  have_last_ = false;
  distance_ = 0.0;
  span_ = 0.0;
}

double TrapMonitor::update(double t, const RobotSnapshot& s) {
  const bool active = s.command_lin.head<2>().norm() > 0.0 || s.command_yaw_rate != 0.0;
  if (!active) {
    reset();
    return 0.0;
  }
  if (!have_last_) {
    have_last_ = true;
    last_t_ = t;
    active_since_ = t;
    return 0.0;
  }
  samples_.push_back({t, t - last_t_, s.lin_vel.head<2>().norm()});
  last_t_ = t;
  while (!samples_.empty() && samples_.front().t - samples_.front().dt < t - window_ - 1e-9) {
    samples_.pop_front();
  }

  distance_ = 0.0;
  span_ = 0.0;
  for (const auto& smp : samples_) {
    distance_ += smp.speed * smp.dt;
    span_ += smp.dt;
  }
  if (span_ <= 0.0 || distance_ >= min_speed_ * span_) return 0.0;
  return std::min(t - active_since_, window_);
}

}  // namespace terramap::rewards
