#pragma once

// State-space algebra for the contact-aware error-state filter.
//
// The nominal state lives on SO(3) x R^27; the error state is a 30-vector of
// tangent perturbations. Rotation perturbations are applied on the body side
// (R <- R * Exp(dtheta)), which makes the propagation rows and the measurement
// Jacobians come out in their familiar -R (x)^ form.
//
// Error-state layout (indices into the 30-vector):
//   [ 0.. 2] dtheta   rotation, body frame
//   [ 3.. 5] dp       position, world frame
//   [ 6.. 8] dv       velocity, world frame
//   [ 9..11] dba      accelerometer bias
//   [12..14] dbg      gyroscope bias
//   [15..26] dpf1..4  foot contact positions, world frame
//   [27..29] dg       gravity, world frame

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace terramap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kNumFeet = 4;
inline constexpr int kStateDim = 30;

using ErrorState = Eigen::Matrix<double, kStateDim, 1>;
using CovarianceMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Column offsets of each block inside the error state.
namespace block {
inline constexpr int kRot = 0;
inline constexpr int kPos = 3;
inline constexpr int kVel = 6;
inline constexpr int kAccBias = 9;
inline constexpr int kGyroBias = 12;
inline constexpr int kFeet = 15;
inline constexpr int kGravity = 27;

constexpr int foot(int i) { return kFeet + 3 * i; }
}  // namespace block

/// Rotation matrix from body to world frame. Kept as a plain 3x3 so that it
/// composes directly with Eigen expressions; validity is checked with
/// is_rotation().
using Rotation = Mat3;

bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Skew-symmetric matrix with hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Exponential map R^3 -> SO(3). Any finite input is accepted; angles beyond
/// pi simply wrap around the same axis.
Rotation so3_exp(const Vec3& axis_angle);

/// Logarithm SO(3) -> R^3 with angle in [0, pi]. At exactly pi the axis sign is
/// ambiguous; the returned axis then has its first nonzero component positive.
Vec3 so3_log(const Rotation& r);

/// Right Jacobian of SO(3) and its inverse.
Mat3 so3_right_jacobian(const Vec3& phi);
Mat3 so3_right_jacobian_inv(const Vec3& phi);

/// Re-orthonormalizes a rotation that accumulated round-off.
Rotation orthonormalize(const Rotation& r);

struct NominalState {
  Rotation rot = Rotation::Identity();
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  Vec3 acc_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  std::array<Vec3, kNumFeet> feet{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  Vec3 gravity{0.0, 0.0, -9.81};

  bool all_finite() const;
};

/// x [+] delta: rotation composed as R * Exp(dtheta), every other block added.
NominalState boxplus(const NominalState& x, const ErrorState& delta);

/// x [-] y: the error state delta with boxplus(y, delta) == x.
ErrorState boxminus(const NominalState& x, const NominalState& y);

}  // namespace terramap
