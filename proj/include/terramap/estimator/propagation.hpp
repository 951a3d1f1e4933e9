#pragma once

#include <array>
#include <span>

#include "terramap/estimator/types.hpp"

namespace terramap::estimator {

/// Process-noise vector ordering: [n_a, n_w, n_bw, n_ba, n_pf1..4].
inline constexpr int kNoiseDim = 24;
using NoiseVector = Eigen::Matrix<double, kNoiseDim, 1>;
using NoiseJacobian = Eigen::Matrix<double, kStateDim, kNoiseDim>;

namespace noise_block {
inline constexpr int kAccel = 0;
inline constexpr int kGyro = 3;
inline constexpr int kGyroBias = 6;
inline constexpr int kAccelBias = 9;
inline constexpr int kFeet = 12;
}  // namespace noise_block

struct GravityInit {
  Vec3 gravity = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  /// False when |g| deviates from 9.81 m/s^2 by more than 2 %.
  bool magnitude_ok = true;
};

struct GravityInitOptions {
  std::size_t min_samples = 50;
  /// Largest accepted per-axis accelerometer variance [(m/s^2)^2].
  double max_accel_variance = 0.05;
  /// Largest accepted per-axis gyroscope variance [(rad/s)^2].
  double max_gyro_variance = 1e-3;
  Rotation initial_rotation = Rotation::Identity();
};

/// Estimates the world-frame gravity vector and gyroscope bias from a
/// stationary IMU segment. Throws InitializationError on too few samples or
/// excessive motion.
GravityInit init_gravity(std::span<const ImuSample> stationary,
                         const GravityInitOptions& options = {});

/// One explicit step x <- x [+] (Phi(x, u, n) dt). Gravity and foot rows of Phi
/// carry no deterministic drift. Exposed separately from propagate() so the
/// Jacobians can be checked against it.
NominalState discrete_step(const NominalState& x, const ImuSample& u, double dt,
                           const NoiseVector& noise = NoiseVector::Zero());

struct StepJacobians {
  CovarianceMatrix fx;  ///< d(x' [-] x'_bar) / d(x_tilde)
  NoiseJacobian fn;     ///< d(x' [-] x'_bar) / d(n)
};

StepJacobians step_jacobians(const NominalState& x, const ImuSample& u, double dt);

/// Discrete noise covariance for one step. Foot blocks use the swing or stance
/// density depending on the contact flag.
Eigen::Matrix<double, kNoiseDim, kNoiseDim> discrete_noise(const NoiseConfig& nc, double dt,
                                                            const std::array<bool, kNumFeet>& contacts);

struct Propagated {
  NominalState state;
  CovarianceMatrix cov;
};

/// Forward propagation of state and covariance over dt in (0, 0.1] s.
/// Throws InvalidInput for a bad dt or a non-finite state.
Propagated propagate(const NominalState& x, const CovarianceMatrix& p, const ImuSample& u,
                     double dt, const std::array<bool, kNumFeet>& contacts,
                     const NoiseConfig& nc);

}  // namespace terramap::estimator
