#include "terramap/estimator/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "terramap/elevmap/sor.hpp"
#include "terramap/error.hpp"

namespace terramap::estimator {

namespace {

constexpr double kMaxStep = 0.1;
constexpr double kGravityTolerance = 0.05;

}  // namespace

LioPipeline::LioPipeline(const PipelineOptions& options, const NominalState& initial,
                         const CovarianceMatrix& initial_cov, double t0)
    : options_(options),
      state_(initial),
      cov_(initial_cov),
      t_state_(t0),
      last_frame_t_(t0),
      gravity_norm0_(initial.gravity.norm()),
      last_imu_t_(-std::numeric_limits<double>::infinity()),
      last_foot_t_(-std::numeric_limits<double>::infinity()),
      prev_frame_state_(initial),
      map_(options.map_bucket, options.map_spacing) {
  options_.noise.validate();
  if (!initial.all_finite() || !is_rotation(initial.rot, 1e-6)) {
    throw InvalidInput("pipeline: initial state is not a valid nominal state");
  }
}

void LioPipeline::add_imu(const ImuSample& s) {
  if (!(s.t >= last_imu_t_)) {
    throw OrderingError("imu sample at t=" + std::to_string(s.t) +
                        " precedes previous sample at t=" + std::to_string(last_imu_t_));
  }
  if (s.t < t_state_) throw OrderingError("imu sample older than the filter time");
  last_imu_t_ = s.t;
  imu_queue_.push_back(s);
}

void LioPipeline::add_feet(const FootMeasurement& f) {
  if (!(f.t >= last_foot_t_)) {
    throw OrderingError("foot measurement at t=" + std::to_string(f.t) +
                        " precedes previous measurement at t=" + std::to_string(last_foot_t_));
  }
  last_foot_t_ = f.t;
  foot_queue_.push_back(f);
}

std::array<bool, kNumFeet> LioPipeline::contacts_at(double t) {
  while (!foot_queue_.empty() && foot_queue_.front().t <= t) {
    held_feet_ = foot_queue_.front();
    foot_queue_.pop_front();
  }
  if (!held_feet_) return {false, false, false, false};
  return held_feet_->contacts();
}

void LioPipeline::step(const ImuSample& u, double dt) {
  while (dt > 0.0) {
    const double h = std::min(dt, kMaxStep);
    const auto contacts = contacts_at(t_state_);
    for (int i = 0; i < kNumFeet; ++i) swung_[i] = swung_[i] || !contacts[i];
    auto next = propagate(state_, cov_, u, h, contacts, options_.noise);
    state_ = next.state;
    cov_ = next.cov;
    t_state_ += h;
    dt -= h;
  }
}

void LioPipeline::reanchor_foot(int i, const Vec3& p_rel) {
  // p_f = p - R p_rel; perturbing R by Exp(dtheta) moves it by R p_rel^ dtheta.
  Eigen::Matrix<double, 3, kStateDim> j = Eigen::Matrix<double, 3, kStateDim>::Zero();
  j.block<3, 3>(0, block::kRot) = state_.rot * hat(p_rel);
  j.block<3, 3>(0, block::kPos) = Mat3::Identity();

  const int f = block::foot(i);
  cov_.block<3, kStateDim>(f, 0).setZero();
  cov_.block<kStateDim, 3>(0, f).setZero();
  const Eigen::Matrix<double, 3, kStateDim> cross = j * cov_;
  const Mat3 rc = state_.rot * (options_.noise.contact_pos_variance * Mat3::Identity()) *
                  state_.rot.transpose();
  const Mat3 ff = cross * j.transpose() + rc;
  cov_.block<3, kStateDim>(f, 0) = cross;
  cov_.block<kStateDim, 3>(0, f) = cross.transpose();
  cov_.block<3, 3>(f, f) = 0.5 * (ff + ff.transpose());
  state_.feet[i] = state_.pos - state_.rot * p_rel;
}

void LioPipeline::advance_to(double t) {
  while (!imu_queue_.empty() && imu_queue_.front().t <= t) {
    const ImuSample s = imu_queue_.front();
    imu_queue_.pop_front();
    if (held_imu_ && s.t > t_state_) step(*held_imu_, s.t - t_state_);
    t_state_ = std::max(t_state_, s.t);
    held_imu_ = s;
  }
  if (held_imu_ && t > t_state_) step(*held_imu_, t - t_state_);
  t_state_ = std::max(t_state_, t);
  contacts_at(t_state_);
}

PointCloud LioPipeline::residual_subset(const PointCloud& scan) const {
  PointCloud out;
  std::unordered_set<CellKey, CellKeyHash> seen;
  for (const auto& p : scan) {
    if (seen.insert(cell_of(p, options_.residual_voxel)).second) out.push_back(p);
  }
  if (out.size() > options_.max_residual_points) {
    PointCloud strided;
    const double stride =
        static_cast<double>(out.size()) / static_cast<double>(options_.max_residual_points);
    for (std::size_t i = 0; i < options_.max_residual_points; ++i) {
      strided.push_back(out[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
    }
    out.swap(strided);
  }
  return out;
}

FrameResult LioPipeline::process_frame(double t, const PointCloud& scan_lidar) {
  if (t < last_frame_t_) {
    throw OrderingError("scan at t=" + std::to_string(t) + " precedes last frame at t=" +
                        std::to_string(last_frame_t_));
  }
  for (const auto& p : scan_lidar) {
    if (!p.allFinite()) throw InvalidInput("scan contains a non-finite point");
  }

  FrameResult result;
  result.t = t;

  {
    ScopedTimer timer(timings_, "propagate");
    advance_to(t);
  }

  PointCloud filtered;
  {
    ScopedTimer timer(timings_, "sor");
    filtered = options_.use_sor
                   ? elevmap::sor_filter(scan_lidar, options_.sor_k, options_.sor_sigma)
                   : scan_lidar;
  }

  const bool use_lidar = map_.size() >= options_.min_map_points;
  const PointCloud candidates = use_lidar ? residual_subset(filtered) : PointCloud{};

  std::optional<FootMeasurement> feet;
  if (options_.use_kinematics && held_feet_ && t - held_feet_->t <= options_.max_foot_age) {
    feet = held_feet_;
  }
  const Vec3 gyro = held_imu_ ? held_imu_->gyro : Vec3::Zero();
  if (feet) {
    for (int i = 0; i < kNumFeet; ++i) {
      if (feet->feet[i].contact && swung_[i]) {
        reanchor_foot(i, feet->feet[i].p_rel);
        swung_[i] = false;
      }
    }
  }

  const Mat3 cv = options_.noise.contact_vel_variance * Mat3::Identity();
  const Mat3 cp = options_.noise.contact_pos_variance * Mat3::Identity();
  const auto& ext = options_.extrinsics;

  std::size_t lidar_rows = 0;
  std::size_t kin_feet = 0;
  std::chrono::steady_clock::duration residual_time{};
  auto build = [&](const NominalState& x, ResidualStack& stack) {
    const auto start = std::chrono::steady_clock::now();
    lidar_rows = 0;
    for (const auto& p : candidates) {
      const Vec3 pw = x.rot * (ext.rot * p + ext.trans) + x.pos;
      const PlaneTarget plane = find_plane(map_, pw, options_.plane);
      const auto r = lidar_residual(x, ext, p, plane);
      if (!r || std::abs(r->h) > options_.max_point_residual) continue;
      stack.add_scalar(r->h, r->jac, options_.noise.lidar_variance);
      ++lidar_rows;
    }
    kin_feet = 0;
    if (feet) {
      for (const auto& k : kinematic_residuals(x, *feet, gyro)) {
        stack.add_block(k.h_vel, k.jac_vel, cv);
        stack.add_block(k.h_pos, k.jac_pos, cp);
        ++kin_feet;
      }
    }
    residual_time += std::chrono::steady_clock::now() - start;
  };

  {
    // Residual construction runs inside the update; report it separately.
    const auto start = std::chrono::steady_clock::now();
    const IekfResult upd = iekf_update(state_, cov_, build, options_.iekf);
    const auto total = std::chrono::steady_clock::now() - start;
    using Ms = std::chrono::duration<double, std::milli>;
    timings_["residuals"].push_back(Ms(residual_time).count());
    timings_["update"].push_back(Ms(total - residual_time).count());
    state_ = upd.state;
    cov_ = upd.cov;
    result.update_skipped = upd.skipped;
  }
  result.lidar_rows = lidar_rows;
  result.kinematic_feet = kin_feet;

  if (std::abs(state_.gravity.norm() - gravity_norm0_) > kGravityTolerance * gravity_norm0_) {
    spdlog::warn("gravity magnitude drifted to {:.4f} m/s^2 at t={:.3f}", state_.gravity.norm(),
                 t);
  }

  {
    ScopedTimer timer(timings_, "map");
    result.points_world.reserve(filtered.size());
    for (const auto& p : filtered) {
      const Vec3 pw = state_.rot * (ext.rot * p + ext.trans) + state_.pos;
      result.points_world.push_back(pw);
      map_.insert(pw);
    }
  }
  result.sensor_origin_world = state_.rot * ext.trans + state_.pos;

  result.increment.rot = prev_frame_state_.rot.transpose() * state_.rot;
  result.increment.trans = prev_frame_state_.rot.transpose() * (state_.pos - prev_frame_state_.pos);
  result.state = state_;
  prev_frame_state_ = state_;
  last_frame_t_ = t;
  return result;
}

}  // namespace terramap::estimator
