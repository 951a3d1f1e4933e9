#pragma once

#include <optional>
#include <span>
#include <vector>

#include "terramap/estimator/types.hpp"
#include "terramap/spatial.hpp"

namespace terramap::estimator {

using JacobianRow = Eigen::Matrix<double, 1, kStateDim>;
using Jacobian3 = Eigen::Matrix<double, 3, kStateDim>;

struct PlaneFitOptions {
  std::size_t neighbors = 5;
  double max_plane_residual = 0.05;  ///< m, every neighbour must lie closer
  double max_neighbor_dist = 1.0;    ///< m, search radius
};

/// Least-squares plane through the given points (centroid + smallest singular
/// direction). Normal is oriented towards `toward`. Valid only if every point
/// lies within max_plane_residual of the plane.
PlaneTarget fit_plane(std::span<const Vec3> points, const Vec3& toward,
                      double max_plane_residual);

/// Plane through the k nearest map points around query.
PlaneTarget find_plane(const PointMap& map, const Vec3& query, const PlaneFitOptions& opt = {});
PlaneTarget find_plane(std::span<const Vec3> map_points, const Vec3& query,
                       const PlaneFitOptions& opt = {});

struct LidarResidual {
  double h = 0.0;
  JacobianRow jac = JacobianRow::Zero();
};

/// Point-to-plane residual u^T (T_wb T_bl p_l - q) and its Jacobian; nullopt
/// for an invalid plane.
std::optional<LidarResidual> lidar_residual(const NominalState& x, const Extrinsics& ext,
                                            const Vec3& p_lidar, const PlaneTarget& plane);

struct KinematicResidual {
  int foot = 0;
  Vec3 h_vel = Vec3::Zero();
  Jacobian3 jac_vel = Jacobian3::Zero();
  Vec3 h_pos = Vec3::Zero();
  Jacobian3 jac_pos = Jacobian3::Zero();
};

/// No-slip velocity and contact-position residuals for every foot flagged in
/// contact.
std::vector<KinematicResidual> kinematic_residuals(const NominalState& x,
                                                   const FootMeasurement& fm,
                                                   const Vec3& gyro_meas);

}  // namespace terramap::estimator
