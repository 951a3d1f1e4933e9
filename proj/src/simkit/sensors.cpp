#include "terramap/simkit/sensors.hpp"

#include <cmath>

#include "terramap/error.hpp"

namespace terramap::simkit {

namespace {

long tick_count(double t_end, double rate) {
  return static_cast<long>(std::floor(t_end * rate + 1e-9));
}

Vec3 gaussian(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return Vec3::Zero();
  std::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return Vec3(x, y, z);
}

}  // namespace

SensorModel SensorModel::noiseless() const {
  SensorModel out = *this;
  out.range_noise = 0.0;
  out.gyro_noise = out.accel_noise = 0.0;
  out.gyro_bias_walk = out.accel_bias_walk = 0.0;
  out.gyro_bias.setZero();
  out.accel_bias.setZero();
  out.foot_pos_noise = out.foot_vel_noise = 0.0;
  return out;
}

void SensorModel::validate() const {
  if (!(imu_rate > 0.0) || !(lidar_rate > 0.0)) throw InvalidInput("sensor rates must be positive");
  if (lidar_rate > imu_rate) throw InvalidInput("LiDAR rate must not exceed the IMU rate");
  const double ratio = imu_rate / lidar_rate;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw InvalidInput("IMU rate must be an integer multiple of the LiDAR rate");
  }
  if (rays_per_scan < 1 || pattern_period < 1) {
    throw InvalidInput("rays per scan and pattern period must be positive");
  }
  if (!(elevation_min < elevation_max) || elevation_min < -90.0 || elevation_max > 90.0) {
    throw InvalidInput("LiDAR elevation band must satisfy -90 <= min < max <= 90");
  }
  if (!(0.0 <= min_range && min_range < max_range)) throw InvalidInput("LiDAR ranges are not ordered");
  for (double s : {range_noise, gyro_noise, accel_noise, gyro_bias_walk, accel_bias_walk,
                   foot_pos_noise, foot_vel_noise}) {
    if (!(s >= 0.0)) throw InvalidInput("sensor noise levels must be non-negative");
  }
  if (!(gravity > 0.0)) throw InvalidInput("gravity magnitude must be positive");
}

int SensorModel::imu_ticks_per_scan() const {
  return static_cast<int>(std::lround(imu_rate / lidar_rate));
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

DiscreteMotion discrete_motion(const PoseFunction& pose, double t, double dt) {
  const PoseSample a = pose(t);
  const PoseSample b = pose(t + dt);
  DiscreteMotion m;
  m.rot = a.rot;
  m.pos = a.pos;
  m.vel = (b.pos - a.pos) / dt;
  m.omega = so3_log(a.rot.transpose() * b.rot) / dt;
  return m;
}

std::vector<estimator::ImuSample> synth_imu(const PoseFunction& pose, double t_end,
                                            const SensorModel& sm, std::uint64_t seed) {
  sm.validate();
  const double dt = 1.0 / sm.imu_rate;
  const long n = tick_count(t_end, sm.imu_rate);
  const Vec3 g(0.0, 0.0, -sm.gravity);
  auto rng = make_stream(seed, 1);

  const double white_a = sm.accel_noise * std::sqrt(sm.imu_rate);
  const double white_g = sm.gyro_noise * std::sqrt(sm.imu_rate);
  const double walk_a = sm.accel_bias_walk * std::sqrt(dt);
  const double walk_g = sm.gyro_bias_walk * std::sqrt(dt);
  Vec3 ba = sm.accel_bias;
  Vec3 bg = sm.gyro_bias;

  std::vector<estimator::ImuSample> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  DiscreteMotion cur = discrete_motion(pose, 0.0, dt);
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / sm.imu_rate;
    const DiscreteMotion next = discrete_motion(pose, static_cast<double>(k + 1) / sm.imu_rate, dt);
    const Vec3 acc_world = (next.vel - cur.vel) / dt;

    estimator::ImuSample s;
    s.t = t;
    s.gyro = cur.omega + bg + gaussian(rng, white_g);
    s.accel = cur.rot.transpose() * (acc_world - g) + ba + gaussian(rng, white_a);
    out.push_back(s);

    bg += gaussian(rng, walk_g);
    ba += gaussian(rng, walk_a);
    cur = next;
  }
  return out;
}

std::vector<Vec3> scan_pattern(const SensorModel& sm, long index) {
  // R2 low-discrepancy sequence over (sin elevation, azimuth).
  constexpr double a1 = 0.7548776662466927;
  constexpr double a2 = 0.5698402909980532;
  const double s_lo = std::sin(sm.elevation_min * M_PI / 180.0);
  const double s_hi = std::sin(sm.elevation_max * M_PI / 180.0);
  const long base = (index % sm.pattern_period) * sm.rays_per_scan;

  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(sm.rays_per_scan));
  for (long j = 0; j < sm.rays_per_scan; ++j) {
    const double n = static_cast<double>(base + j);
    const double u = std::fmod(0.5 + n * a1, 1.0);
    const double v = std::fmod(0.5 + n * a2, 1.0);
    const double sz = s_lo + (s_hi - s_lo) * u;
    const double cz = std::sqrt(std::max(0.0, 1.0 - sz * sz));
    const double az = 2.0 * M_PI * v;
    dirs.emplace_back(cz * std::cos(az), cz * std::sin(az), sz);
  }
  return dirs;
}

estimator::PointCloud synth_lidar(const Rotation& rot, const Vec3& pos, const Terrain& terrain,
                                  const SensorModel& sm, long index, std::mt19937_64& rng) {
  const auto& ext = sm.extrinsics;
  const Vec3 origin = rot * ext.trans + pos;
  const Mat3 to_world = rot * ext.rot;

  estimator::PointCloud out;
  for (const Vec3& d : scan_pattern(sm, index)) {
    const auto s = terrain.intersect(origin, to_world * d, sm.max_range);
    if (!s || *s < sm.min_range) continue;
    double r = *s;
    if (sm.range_noise > 0.0) r += std::normal_distribution<double>(0.0, sm.range_noise)(rng);
    out.push_back(d * r);
  }
  return out;
}

std::vector<estimator::FootMeasurement> synth_kinematics(const Motion& traj, double t_end,
                                                         const SensorModel& sm,
                                                         std::uint64_t seed) {
  sm.validate();
  const double dt = 1.0 / sm.imu_rate;
  const long n = tick_count(t_end, sm.imu_rate);
  auto rng = make_stream(seed, 3);
  const PoseFunction pose = [&](double t) { return traj.pose(t); };

  std::vector<estimator::FootMeasurement> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / sm.imu_rate;
    const double t_next = static_cast<double>(k + 1) / sm.imu_rate;
    const DiscreteMotion m = discrete_motion(pose, t, dt);
    const Mat3 rt = m.rot.transpose();

    estimator::FootMeasurement fm;
    fm.t = t;
    for (int i = 0; i < kNumFeet; ++i) {
      auto& f = fm.feet[i];
      f.contact = traj.contact(i, t);
      const Vec3 pf = traj.foot(i, t);
      const Vec3 vf = f.contact ? Vec3::Zero() : Vec3((traj.foot(i, t_next) - pf) / dt);
      f.p_rel = rt * (m.pos - pf);
      f.v_rel = -rt * (m.vel - vf) - m.omega.cross(f.p_rel);
      f.p_rel += gaussian(rng, sm.foot_pos_noise);
      f.v_rel += gaussian(rng, sm.foot_vel_noise);
    }
    out.push_back(fm);
  }
  return out;
}

}  // namespace terramap::simkit
