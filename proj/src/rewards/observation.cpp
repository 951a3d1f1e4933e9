#include "terramap/rewards/observation.hpp"

namespace terramap::rewards {

ObservationFrame observation_frame(const RobotSnapshot& s) {
  ObservationFrame f;
  f.segment<3>(obs::kAngVel) = s.ang_vel;
  f.segment<3>(obs::kGravity) = s.projected_gravity;
  f.segment<3>(obs::kCommand) << s.command_lin.x(), s.command_lin.y(), s.command_yaw_rate;
  f.segment<kNumJoints>(obs::kJointPos) = s.q;
  f.segment<kNumJoints>(obs::kJointVel) = s.dq;
  f.segment<kNumJoints>(obs::kLastAction) = s.last_action;
  return f;
}

void ObservationHistory::push(const ObservationFrame& frame) {
  if (frames_.empty()) {
    frames_.assign(obs::kHistory, frame);
    return;
  }
  frames_.pop_back();
  frames_.push_front(frame);
}

ObservationStack ObservationHistory::stacked() const {
  ObservationStack out = ObservationStack::Zero();
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    out.segment<obs::kSize>(static_cast<Eigen::Index>(i) * obs::kSize) = frames_[i];
  }
  return out;
}

PrivilegedVector PrivilegedState::to_vector() const {
  PrivilegedVector v;
  int o = 0;
  v.segment<3>(o) = lin_vel;
  o += 3;
  for (int i = 0; i < kNumFeet; ++i) v[o++] = contact[i] ? 1.0 : 0.0;
  v.segment<4>(o) = physics.link_masses;
  o += 4;
  v[o++] = physics.friction;
  v.segment<2>(o) = physics.com_offset;
  o += 2;
  v.segment<2>(o) = physics.disturbance;
  o += 2;
  v[o++] = physics.kp;
  v[o++] = physics.kd;
  v.segment<kNumJoints>(o) = physics.motor_strength;
  o += kNumJoints;
  v.segment<kNumJoints>(o) = physics.motor_offset;
  return v;
}

Observation assemble_observation(const RobotSnapshot& s, ObservationHistory& history,
                                 const PhysicalParams& physics) {
  Observation out;
  out.frame = observation_frame(s);
  history.push(out.frame);
  out.history = history.stacked();
  out.privileged.lin_vel = s.lin_vel;
  out.privileged.contact = s.contact;
  out.privileged.physics = physics;
  return out;
}

}  // namespace terramap::rewards
