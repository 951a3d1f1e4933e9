#include "terramap/estimator/measurements.hpp"

#include <Eigen/SVD>

namespace terramap::estimator {

PlaneTarget fit_plane(std::span<const Vec3> points, const Vec3& toward,
                      double max_plane_residual) {
  PlaneTarget plane;
  if (points.size() < 3) return plane;

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::MatrixX3d centered(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    centered.row(static_cast<Eigen::Index>(i)) = (points[i] - centroid).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixX3d> svd(centered, Eigen::ComputeFullV);
  Vec3 normal = svd.matrixV().col(2);
  if (!normal.allFinite() || normal.norm() < 0.5) return plane;
  normal.normalize();
  if (normal.dot(toward - centroid) < 0.0) normal = -normal;

  for (const auto& p : points) {
    if (std::abs(normal.dot(p - centroid)) >= max_plane_residual) return plane;
  }
  plane.normal = normal;
  plane.anchor = centroid;
  plane.valid = true;
  return plane;
}

PlaneTarget find_plane(const PointMap& map, const Vec3& query, const PlaneFitOptions& opt) {
  thread_local std::vector<Vec3> neighbors;
  map.knn(query, opt.neighbors, opt.max_neighbor_dist, neighbors);
  if (neighbors.size() < opt.neighbors) return {};
  return fit_plane(neighbors, query, opt.max_plane_residual);
}

PlaneTarget find_plane(std::span<const Vec3> map_points, const Vec3& query,
                       const PlaneFitOptions& opt) {
  if (map_points.empty()) return {};
  const KdTree tree(map_points);
  std::vector<Neighbor> found;
  tree.knn(query, opt.neighbors, found, KdTree::kNoExclude,
           opt.max_neighbor_dist * opt.max_neighbor_dist);
  if (found.size() < opt.neighbors) return {};
  std::vector<Vec3> pts;
  pts.reserve(found.size());
  for (const auto& n : found) pts.push_back(map_points[n.index]);
  return fit_plane(pts, query, opt.max_plane_residual);
}

std::optional<LidarResidual> lidar_residual(const NominalState& x, const Extrinsics& ext,
                                            const Vec3& p_lidar, const PlaneTarget& plane) {
  if (!plane.valid) return std::nullopt;
  const Vec3 p_body = ext.rot * p_lidar + ext.trans;
  const Vec3 p_world = x.rot * p_body + x.pos;

  LidarResidual r;
  r.h = plane.normal.dot(p_world - plane.anchor);
  r.jac.segment<3>(block::kRot) = -plane.normal.transpose() * x.rot * hat(p_body);
  r.jac.segment<3>(block::kPos) = plane.normal.transpose();
  return r;
}

std::vector<KinematicResidual> kinematic_residuals(const NominalState& x,
                                                   const FootMeasurement& fm,
                                                   const Vec3& gyro_meas) {
  std::vector<KinematicResidual> out;
  const Vec3 omega = gyro_meas - x.gyro_bias;
  const Mat3 rt = x.rot.transpose();
  for (int i = 0; i < kNumFeet; ++i) {
    const FootReading& f = fm.feet[i];
    if (!f.contact) continue;

    KinematicResidual r;
    r.foot = i;

    const Vec3 rel_vel = f.v_rel + omega.cross(f.p_rel);
    r.h_vel = x.vel + x.rot * rel_vel;
    r.jac_vel.block<3, 3>(0, block::kRot) = -x.rot * hat(rel_vel);
    r.jac_vel.block<3, 3>(0, block::kVel) = Mat3::Identity();
    r.jac_vel.block<3, 3>(0, block::kGyroBias) = x.rot * hat(f.p_rel);

    const Vec3 body_from_foot = rt * (x.pos - x.feet[i]);
    r.h_pos = f.p_rel - body_from_foot;
    r.jac_pos.block<3, 3>(0, block::kRot) = -hat(body_from_foot);
    r.jac_pos.block<3, 3>(0, block::kPos) = -rt;
    r.jac_pos.block<3, 3>(0, block::foot(i)) = rt;
    out.push_back(r);
  }
  return out;
}

}  // namespace terramap::estimator
