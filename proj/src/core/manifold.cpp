#include "terramap/manifold.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace terramap {

namespace {

constexpr double kSmallAngle = 1e-8;
// Below this distance from pi the sin(theta) based axis loses precision and
// the symmetric part of R is used instead.
constexpr double kNearPi = 1e-3;

}  // namespace

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 err = r.transpose() * r - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Rotation so3_exp(const Vec3& axis_angle) {
  const double theta2 = axis_angle.squaredNorm();
  const Mat3 k = hat(axis_angle);
  if (theta2 < kSmallAngle * kSmallAngle) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double theta = std::sqrt(theta2);
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / theta2;
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 so3_log(const Rotation& r) {
  const Vec3 vee(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_term = 0.5 * vee.norm();
  const double cos_term = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_term, cos_term);

  if (theta < kSmallAngle) {
    return 0.5 * vee;
  }
  if (theta < M_PI - kNearPi) {
    return (0.5 * theta / std::sin(theta)) * vee;
  }

  // Near pi: R + R^T = 2 cos(theta) I + 2 (1 - cos(theta)) a a^T.
  const Mat3 aat = (0.5 * (r + r.transpose()) - cos_term * Mat3::Identity()) / (1.0 - cos_term);
  int col = 0;
  aat.diagonal().maxCoeff(&col);
  Vec3 axis = aat.col(col) / std::sqrt(std::max(aat(col, col), 0.0));
  axis.normalize();

  const double along = axis.dot(vee);
  if (std::abs(along) > 1e-12) {
    if (along < 0.0) axis = -axis;
  } else {
    // Exactly pi: both signs describe the same rotation.
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axis[i]) > 1e-12) {
        if (axis[i] < 0.0) axis = -axis;
        break;
      }
    }
  }
  return theta * axis;
}

Mat3 so3_right_jacobian(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 k = hat(phi);
  if (theta2 < 1e-10) {
    return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double theta = std::sqrt(theta2);
  return Mat3::Identity() - ((1.0 - std::cos(theta)) / theta2) * k +
         ((theta - std::sin(theta)) / (theta2 * theta)) * k * k;
}

Mat3 so3_right_jacobian_inv(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 k = hat(phi);
  if (theta2 < 1e-10) {
    return Mat3::Identity() + 0.5 * k + (1.0 / 12.0) * k * k;
  }
  const double theta = std::sqrt(theta2);
  const double coeff = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * k + coeff * k * k;
}

Rotation orthonormalize(const Rotation& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) = -u.col(2);
    out = u * svd.matrixV().transpose();
  }
  return out;
}

bool NominalState::all_finite() const {
  if (!rot.allFinite() || !pos.allFinite() || !vel.allFinite() || !acc_bias.allFinite() ||
      !gyro_bias.allFinite() || !gravity.allFinite()) {
    return false;
  }
  for (const auto& f : feet) {
    if (!f.allFinite()) return false;
  }
  return true;
}

NominalState boxplus(const NominalState& x, const ErrorState& delta) {
  NominalState out = x;
  out.rot = x.rot * so3_exp(delta.segment<3>(block::kRot));
  out.pos += delta.segment<3>(block::kPos);
  out.vel += delta.segment<3>(block::kVel);
  out.acc_bias += delta.segment<3>(block::kAccBias);
  out.gyro_bias += delta.segment<3>(block::kGyroBias);
  for (int i = 0; i < kNumFeet; ++i) {
    out.feet[i] += delta.segment<3>(block::foot(i));
  }
  out.gravity += delta.segment<3>(block::kGravity);
  return out;
}

ErrorState boxminus(const NominalState& x, const NominalState& y) {
  ErrorState d;
  d.segment<3>(block::kRot) = so3_log(y.rot.transpose() * x.rot);
  d.segment<3>(block::kPos) = x.pos - y.pos;
  d.segment<3>(block::kVel) = x.vel - y.vel;
  d.segment<3>(block::kAccBias) = x.acc_bias - y.acc_bias;
  d.segment<3>(block::kGyroBias) = x.gyro_bias - y.gyro_bias;
  for (int i = 0; i < kNumFeet; ++i) {
    d.segment<3>(block::foot(i)) = x.feet[i] - y.feet[i];
  }
  d.segment<3>(block::kGravity) = x.gravity - y.gravity;
  return d;
}

}  // namespace terramap
