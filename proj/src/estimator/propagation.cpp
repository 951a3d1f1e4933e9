#include "terramap/estimator/propagation.hpp"

#include <cmath>
#include <string>

#include "terramap/error.hpp"

namespace terramap::estimator {

void NoiseConfig::validate() const {
  const std::array<std::pair<const char*, double>, 9> values{{
      {"gyro_noise", gyro_noise},
      {"accel_noise", accel_noise},
      {"gyro_bias_walk", gyro_bias_walk},
      {"accel_bias_walk", accel_bias_walk},
      {"foot_stance_noise", foot_stance_noise},
      {"foot_swing_noise", foot_swing_noise},
      {"lidar_variance", lidar_variance},
      {"contact_vel_variance", contact_vel_variance},
      {"contact_pos_variance", contact_pos_variance},
  }};
  for (const auto& [name, v] : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidInput(std::string("noise parameter '") + name + "' must be positive");
    }
  }
  if (foot_swing_noise < 100.0 * foot_stance_noise) {
    throw InvalidInput("swing foot noise must be at least 100x the stance foot noise");
  }
}

GravityInit init_gravity(std::span<const ImuSample> stationary, const GravityInitOptions& options) {
  if (stationary.size() < options.min_samples) {
    throw InitializationError("gravity initialization needs at least " +
                              std::to_string(options.min_samples) + " stationary samples, got " +
                              std::to_string(stationary.size()));
  }
  const double n = static_cast<double>(stationary.size());
  Vec3 mean_acc = Vec3::Zero();
  Vec3 mean_gyro = Vec3::Zero();
  for (const auto& s : stationary) {
    mean_acc += s.accel;
    mean_gyro += s.gyro;
  }
  mean_acc /= n;
  mean_gyro /= n;

  Vec3 var_acc = Vec3::Zero();
  Vec3 var_gyro = Vec3::Zero();
  for (const auto& s : stationary) {
    var_acc += (s.accel - mean_acc).cwiseAbs2();
    var_gyro += (s.gyro - mean_gyro).cwiseAbs2();
  }
  var_acc /= n;
  var_gyro /= n;
  if (var_acc.maxCoeff() > options.max_accel_variance ||
      var_gyro.maxCoeff() > options.max_gyro_variance) {
    throw InitializationError("IMU not stationary during gravity initialization");
  }

  GravityInit out;
  out.gravity = -(options.initial_rotation * mean_acc);
  out.gyro_bias = mean_gyro;
  out.magnitude_ok = std::abs(out.gravity.norm() - 9.81) <= 0.02 * 9.81;
  return out;
}

NominalState discrete_step(const NominalState& x, const ImuSample& u, double dt,
                           const NoiseVector& noise) {
  const Vec3 omega = u.gyro - x.gyro_bias - noise.segment<3>(noise_block::kGyro);
  const Vec3 acc = u.accel - x.acc_bias - noise.segment<3>(noise_block::kAccel);

  NominalState out = x;
  out.rot = x.rot * so3_exp(omega * dt);
  out.pos = x.pos + x.vel * dt;
  out.vel = x.vel + (x.rot * acc + x.gravity) * dt;
  out.acc_bias = x.acc_bias + noise.segment<3>(noise_block::kAccelBias) * dt;
  out.gyro_bias = x.gyro_bias + noise.segment<3>(noise_block::kGyroBias) * dt;
  for (int i = 0; i < kNumFeet; ++i) {
    out.feet[i] = x.feet[i] + noise.segment<3>(noise_block::kFeet + 3 * i) * dt;
  }
  return out;
}

StepJacobians step_jacobians(const NominalState& x, const ImuSample& u, double dt) {
  const Vec3 omega = u.gyro - x.gyro_bias;
  const Vec3 acc = u.accel - x.acc_bias;
  const Vec3 phi = omega * dt;
  const Mat3 jr = so3_right_jacobian(phi);
  const Mat3 eye = Mat3::Identity();

  StepJacobians j;
  j.fx.setIdentity();
  j.fx.block<3, 3>(block::kRot, block::kRot) = so3_exp(-phi);
  j.fx.block<3, 3>(block::kRot, block::kGyroBias) = -jr * dt;
  j.fx.block<3, 3>(block::kPos, block::kVel) = eye * dt;
  j.fx.block<3, 3>(block::kVel, block::kRot) = -x.rot * hat(acc) * dt;
  j.fx.block<3, 3>(block::kVel, block::kAccBias) = -x.rot * dt;
  j.fx.block<3, 3>(block::kVel, block::kGravity) = eye * dt;

  j.fn.setZero();
  j.fn.block<3, 3>(block::kVel, noise_block::kAccel) = -x.rot * dt;
  j.fn.block<3, 3>(block::kRot, noise_block::kGyro) = -jr * dt;
  j.fn.block<3, 3>(block::kGyroBias, noise_block::kGyroBias) = eye * dt;
  j.fn.block<3, 3>(block::kAccBias, noise_block::kAccelBias) = eye * dt;
  for (int i = 0; i < kNumFeet; ++i) {
    j.fn.block<3, 3>(block::foot(i), noise_block::kFeet + 3 * i) = eye * dt;
  }
  return j;
}

Eigen::Matrix<double, kNoiseDim, kNoiseDim> discrete_noise(const NoiseConfig& nc, double dt,
                                                            const std::array<bool, kNumFeet>& contacts) {
  Eigen::Matrix<double, kNoiseDim, 1> diag;
  diag.segment<3>(noise_block::kAccel).setConstant(nc.accel_noise * nc.accel_noise);
  diag.segment<3>(noise_block::kGyro).setConstant(nc.gyro_noise * nc.gyro_noise);
  diag.segment<3>(noise_block::kGyroBias).setConstant(nc.gyro_bias_walk * nc.gyro_bias_walk);
  diag.segment<3>(noise_block::kAccelBias).setConstant(nc.accel_bias_walk * nc.accel_bias_walk);
  for (int i = 0; i < kNumFeet; ++i) {
    const double sigma = contacts[i] ? nc.foot_stance_noise : nc.foot_swing_noise;
    diag.segment<3>(noise_block::kFeet + 3 * i).setConstant(sigma * sigma);
  }
  // Densities become per-step variances; F_n already carries a factor dt.
  return (diag / dt).asDiagonal();
}

Propagated propagate(const NominalState& x, const CovarianceMatrix& p, const ImuSample& u,
                     double dt, const std::array<bool, kNumFeet>& contacts,
                     const NoiseConfig& nc) {
  if (!(dt > 0.0) || dt > 0.1) {
    throw InvalidInput("propagation step must lie in (0, 0.1] s, got " + std::to_string(dt));
  }
  if (!x.all_finite() || !p.allFinite() || !u.gyro.allFinite() || !u.accel.allFinite()) {
    throw InvalidInput("non-finite input to propagation");
  }

  const StepJacobians j = step_jacobians(x, u, dt);
  const auto q = discrete_noise(nc, dt, contacts);

  Propagated out;
  out.state = discrete_step(x, u, dt);
  out.state.rot = orthonormalize(out.state.rot);
  out.cov = j.fx * p * j.fx.transpose() + j.fn * q * j.fn.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

}  // namespace terramap::estimator
