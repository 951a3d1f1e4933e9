#pragma once

#include <deque>

#include "terramap/rewards/snapshot.hpp"

namespace terramap::rewards {

/// Proprioceptive frame layout: (omega, g_proj, command, q, dq, a_{t-1}).
/// The command slot holds (v*_x, v*_y, w*_yaw).
namespace obs {
inline constexpr int kAngVel = 0;
inline constexpr int kGravity = 3;
inline constexpr int kCommand = 6;
inline constexpr int kJointPos = 9;
inline constexpr int kJointVel = 21;
inline constexpr int kLastAction = 33;
inline constexpr int kSize = 45;
inline constexpr int kHistory = 6;
}  // namespace obs

using ObservationFrame = Eigen::Matrix<double, obs::kSize, 1>;
using ObservationStack = Eigen::Matrix<double, obs::kSize * obs::kHistory, 1>;

ObservationFrame observation_frame(const RobotSnapshot& s);

/// Fixed-depth history, newest first. The first push fills every slot with
/// that frame.
class ObservationHistory {
 public:
  void push(const ObservationFrame& frame);
  void reset() { frames_.clear(); }
  bool empty() const { return frames_.empty(); }
  const ObservationFrame& at(int age) const { return frames_.at(static_cast<std::size_t>(age)); }
  ObservationStack stacked() const;

 private:
  std::deque<ObservationFrame> frames_;
};

/// Simulator-side physical parameters that only the critic sees.
struct PhysicalParams {
  Eigen::Vector4d link_masses = Eigen::Vector4d::Zero();
  double friction = 1.0;
  Vec2 com_offset = Vec2::Zero();
  Vec2 disturbance = Vec2::Zero();
  double kp = 20.0;
  double kd = 0.5;
  JointVector motor_strength = JointVector::Ones();
  JointVector motor_offset = JointVector::Zero();
};

inline constexpr int kPrivilegedSize = 42;
using PrivilegedVector = Eigen::Matrix<double, kPrivilegedSize, 1>;

struct PrivilegedState {
  Vec3 lin_vel = Vec3::Zero();
  std::array<bool, kNumFeet> contact{};
  PhysicalParams physics;

  /// (v, c, m, mu, zeta, f, kp, kd, alpha, dq).
  PrivilegedVector to_vector() const;
};

struct Observation {
  ObservationFrame frame;
  ObservationStack history;
  PrivilegedState privileged;
};

/// Pushes the current frame into `history` and returns the frame, the stacked
/// history and the privileged state.
Observation assemble_observation(const RobotSnapshot& s, ObservationHistory& history,
                                 const PhysicalParams& physics = {});

}  // namespace terramap::rewards
