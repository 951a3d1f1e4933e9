#pragma once

#include <deque>
#include <optional>

#include "terramap/estimator/iekf.hpp"
#include "terramap/estimator/propagation.hpp"
#include "terramap/spatial.hpp"
#include "terramap/timing.hpp"

namespace terramap::estimator {

struct PipelineOptions {
  NoiseConfig noise;
  Extrinsics extrinsics;
  PlaneFitOptions plane;
  IekfOptions iekf;

  bool use_kinematics = true;
  bool use_sor = true;
  std::size_t sor_k = 10;
  double sor_sigma = 2.0;

  /// Scan points are thinned on this voxel size before residual construction.
  double residual_voxel = 0.2;
  std::size_t max_residual_points = 500;
  /// Correspondences with |h| above this are treated as outliers.
  double max_point_residual = 0.5;
  std::size_t min_map_points = 100;

  double map_bucket = 0.5;
  double map_spacing = 0.1;

  /// Foot readings older than this relative to the scan are not used.
  double max_foot_age = 0.05;
};

/// Rigid motion of the body between consecutive frames, in the previous
/// body frame: p_prev = rot * p_now + trans.
struct Increment {
  Rotation rot = Rotation::Identity();
  Vec3 trans = Vec3::Zero();
};

struct FrameResult {
  double t = 0.0;
  Increment increment;
  NominalState state;
  /// Filtered scan in the world frame at the updated pose.
  PointCloud points_world;
  Vec3 sensor_origin_world = Vec3::Zero();
  std::size_t lidar_rows = 0;
  std::size_t kinematic_feet = 0;
  bool update_skipped = false;
};

/// Per-frame orchestration: propagate over buffered IMU samples, build LiDAR
/// and leg residuals, run the iterated update and grow the point map.
/// A foot that swung since the previous frame is re-anchored at the position
/// its leg reading implies before it contributes contact residuals again.
///
/// Sensor input must arrive in timestamp order; late samples and scans older
/// than the last processed frame raise OrderingError.
class LioPipeline {
 public:
  LioPipeline(const PipelineOptions& options, const NominalState& initial,
              const CovarianceMatrix& initial_cov, double t0);

  void add_imu(const ImuSample& s);
  void add_feet(const FootMeasurement& f);

  FrameResult process_frame(double t, const PointCloud& scan_lidar);

  const NominalState& state() const { return state_; }
  const CovarianceMatrix& covariance() const { return cov_; }
  double time() const { return t_state_; }
  const PointMap& map() const { return map_; }
  const StageTimes& timings() const { return timings_; }

 private:
  void advance_to(double t);
  void step(const ImuSample& u, double dt);
  std::array<bool, kNumFeet> contacts_at(double t);
  PointCloud residual_subset(const PointCloud& scan) const;
  /// Replaces the foot state after a swing by the position the leg reading
  /// implies at the current estimate, with matching cross-covariance.
  void reanchor_foot(int i, const Vec3& p_rel);

  PipelineOptions options_;
  NominalState state_;
  CovarianceMatrix cov_;
  double t_state_;
  double last_frame_t_;
  double gravity_norm0_;

  std::deque<ImuSample> imu_queue_;
  std::optional<ImuSample> held_imu_;
  double last_imu_t_;

  std::deque<FootMeasurement> foot_queue_;
  std::optional<FootMeasurement> held_feet_;
  double last_foot_t_;
  std::array<bool, kNumFeet> swung_{};

  NominalState prev_frame_state_;
  PointMap map_;
  StageTimes timings_;
};

}  // namespace terramap::estimator
