#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "terramap/app/runner.hpp"
#include "terramap/error.hpp"
#include "terramap/simkit/robot.hpp"

namespace terramap::app {

namespace {

std::size_t tick_of(double t, double rate) { return static_cast<std::size_t>(std::lround(t * rate)); }

double yaw_of(const Rotation& r) { return std::atan2(r(1, 0), r(0, 0)); }

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", file.string()));
  out << text;
}

void merge_times(StageTimes& into, const StageTimes& from) {
  for (const auto& [stage, samples] : from) {
    auto& dst = into[stage];
    dst.insert(dst.end(), samples.begin(), samples.end());
  }
}

}  // namespace

InitialEstimate initial_estimate(const simkit::SensorLog& log, const RunConfig& cfg) {
  if (log.imu.empty() || log.ground_truth.size() < 2 || log.feet.empty()) {
    throw InitializationError("sensor log too short to initialize");
  }
  const double window = cfg.init.gravity_window;
  if (cfg.scenario.path.moving() && cfg.scenario.path.start_time < window) {
    throw InitializationError(fmt::format(
        "path.start_time {} is inside the {} s gravity window; the robot must stand still",
        cfg.scenario.path.start_time, window));
  }
  std::vector<estimator::ImuSample> still;
  for (const auto& s : log.imu) {
    if (s.t < window) still.push_back(s);
  }
  estimator::GravityInitOptions gopt;
  gopt.initial_rotation = log.ground_truth[0].rot;
  const auto g = estimator::init_gravity(still, gopt);
  if (!g.magnitude_ok) {
    spdlog::warn("initial gravity magnitude {:.4f} m/s^2 is off by more than 2%", g.gravity.norm());
  }

  InitialEstimate init;
  auto& x = init.state;
  x.rot = log.ground_truth[0].rot;
  x.pos = log.ground_truth[0].pos;
  x.vel = (log.ground_truth[1].pos - log.ground_truth[0].pos) /
          (log.ground_truth[1].t - log.ground_truth[0].t);
  x.gravity = g.gravity;
  x.gyro_bias = g.gyro_bias;
  for (int i = 0; i < kNumFeet; ++i) x.feet[i] = x.pos - x.rot * log.feet[0].feet[i].p_rel;

  init.cov = CovarianceMatrix::Zero();
  auto set = [&](int offset, double v) {
    init.cov.block<3, 3>(offset, offset) = v * Mat3::Identity();
  };
  const auto& ic = cfg.init;
  set(block::kRot, ic.rot_variance);
  set(block::kPos, ic.pos_variance);
  set(block::kVel, ic.vel_variance);
  set(block::kAccBias, ic.accel_bias_variance);
  set(block::kGyroBias, ic.gyro_bias_variance);
  for (int i = 0; i < kNumFeet; ++i) set(block::foot(i), ic.foot_variance);
  set(block::kGravity, ic.gravity_variance);
  return init;
}

EstimationRun run_estimation(const RunConfig& cfg, const simkit::SensorLog& log,
                             const FrameCallback& on_frame) {
  const InitialEstimate init = initial_estimate(log, cfg);
  const double t0 = log.ground_truth.front().t;
  estimator::LioPipeline pipe(cfg.pipeline, init.state, init.cov, t0);
  const double rate = cfg.scenario.sensors.imu_rate;

  EstimationRun run;
  run.est.push_back({t0, init.state.pos, init.state.rot});
  run.gt.push_back(log.ground_truth.front());

  std::size_t ii = 0;
  std::size_t fi = 0;
  for (const auto& scan : log.scans) {
    while (ii < log.imu.size() && log.imu[ii].t <= scan.t) pipe.add_imu(log.imu[ii++]);
    while (fi < log.feet.size() && log.feet[fi].t <= scan.t) pipe.add_feet(log.feet[fi++]);
    const auto frame = pipe.process_frame(scan.t, scan.points);
    if (!frame.state.all_finite()) throw Error(fmt::format("estimate diverged at t={}", scan.t));
    const std::size_t k = tick_of(scan.t, rate);
    if (k >= log.ground_truth.size()) break;
    run.est.push_back({scan.t, frame.state.pos, frame.state.rot});
    run.gt.push_back(log.ground_truth[k]);
    if (on_frame) on_frame(frame);
  }
  run.timings = pipe.timings();
  return run;
}

MapBuilder::MapBuilder(const RunConfig& cfg, const NominalState& initial)
    : occupancy_(cfg.occupancy),
      interpolate_(cfg.features.interpolation),
      endpoint_extension_(cfg.endpoint_extension),
      grid_(cfg.grid, initial.rot, initial.pos) {}

const elevmap::HeightGrid& MapBuilder::update(const estimator::FrameResult& frame) {
  grid_.move_to(frame.state.rot, frame.state.pos);
  {
    ScopedTimer timer(timings_, "integrate_scan");
    // A return lies on the surface, i.e. on a cell face for axis-aligned
    // terrain; nudging it along the ray puts it in the solid cell.
    const Vec3& o = frame.sensor_origin_world;
    points_.clear();
    for (const auto& p : frame.points_world) {
      const Vec3 d = p - o;
      const double n = d.norm();
      points_.push_back(n > 0.0 ? Vec3(p + (endpoint_extension_ / n) * d) : p);
    }
    grid_.integrate_scan(points_, o, occupancy_);
  }
  {
    ScopedTimer timer(timings_, "extract_interpolate");
    heights_ = elevmap::extract_heights(grid_, occupancy_);
    if (interpolate_) {
      const auto [ix, iy] = heights_.column_of(frame.state.pos.x(), frame.state.pos.y());
      heights_ = elevmap::interpolate(heights_, ix, iy);
    }
  }
  return heights_;
}

std::vector<fs::path> cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  const auto log = simkit::run_scenario(cfg.scenario);
  fs::create_directories(out);
  auto files = simkit::write_sensor_log(log, out);
  write_manifest(out, cfg, files);
  spdlog::info("simulate: {} IMU samples, {} scans written to {}", log.imu.size(), log.scans.size(),
               out.string());
  return files;
}

RunResult cmd_run(const RunConfig& cfg, const fs::path& out) {
  const simkit::Terrain terrain(cfg.scenario.terrain);
  const auto log = simkit::run_scenario(cfg.scenario);
  fs::create_directories(out);
  RunResult result;

  const InitialEstimate init = initial_estimate(log, cfg);
  MapBuilder mapper(cfg, init.state);
  std::string policy_csv = "t";
  for (int i = 0; i < elevmap::kPolicySize; ++i) policy_csv += fmt::format(",h{}", i);
  policy_csv += '\n';

  const auto run = run_estimation(cfg, log, [&](const estimator::FrameResult& frame) {
    const auto& hg = mapper.update(frame);
    const auto h = elevmap::policy_grid_sample(hg, yaw_of(frame.state.rot), frame.state.pos,
                                               cfg.policy);
    policy_csv += fmt::format("{:.9g}", frame.t);
    for (double v : h) policy_csv += fmt::format(",{:.6f}", v);
    policy_csv += '\n';
  });

  write_tum(out / "est.tum", run.est);
  write_tum(out / "gt.tum", run.gt);
  write_text(out / "policy_heights.csv", policy_csv);
  write_text(out / "heights.csv", elevmap::height_grid_csv(mapper.heights()));
  write_text(out / "voxels.csv", elevmap::voxel_csv(mapper.grid()));
  result.files = {"est.tum", "gt.tum", "policy_heights.csv", "heights.csv", "voxels.csv"};

  // Rewards along the ground-truth motion, scored against the true terrain.
  {
    const simkit::Motion motion = simkit::make_motion(cfg.scenario, terrain);
    simkit::SnapshotParams sp;
    sp.dt = cfg.reward_dt;
    sp.gravity = cfg.scenario.sensors.gravity;
    const rewards::HeightLookup lookup = [&](double x, double y) { return terrain.height(x, y); };
    std::ofstream jl(out / "rewards.jsonl", std::ios::binary);
    const auto snaps = simkit::robot_snapshots(motion, cfg.scenario.duration, sp);
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      const auto& s = snaps[k];
      const auto b = rewards::reward_total(s, rewards::classify_feet(s, lookup, cfg.stencil),
                                           cfg.weights);
      Json line;
      line["t"] = static_cast<double>(k) * sp.dt;
      line["total"] = b.total;
      Json terms = Json::object();
      for (int i = 0; i < rewards::kNumTerms; ++i) {
        // + 0.0 turns the -0.0 of zero penalties into 0.
        terms[std::string(rewards::term_name(static_cast<rewards::Term>(i)))] = b.weighted[i] + 0.0;
      }
      line["terms"] = std::move(terms);
      jl << line.dump() << '\n';
    }
    result.files.emplace_back("rewards.jsonl");
  }

  auto& m = result.metrics;
  m = eval::trajectory_metrics(run.est, run.gt, cfg.eval.align, cfg.eval.rpe_delta);
  if (mapper.heights().nx > 0) {
    const auto acc =
        eval::map_rmse(mapper.heights(), [&](double x, double y) { return terrain.height(x, y); });
    if (acc.defined()) m.map_rmse = acc.rmse;
    m.map_coverage = acc.coverage;
  }
  {
    std::ofstream z(out / "z_error.csv", std::ios::binary);
    eval::write_z_error_csv(z, eval::z_error_series(run.est, run.gt));
  }
  write_text(out / "metrics.json", eval::to_json(m).dump(2) + "\n");
  result.files.emplace_back("z_error.csv");
  result.files.emplace_back("metrics.json");

  // Wall-clock timings differ between runs and stay out of the manifest.
  StageTimes times = run.timings;
  merge_times(times, mapper.timings());
  m.timing = eval::timing_report(times);
  write_text(out / "timing.json", eval::to_json(m.timing).dump(2) + "\n");

  write_manifest(out, cfg, result.files);
  spdlog::info("run: {} frames, ape {:.4f} m, z-mae {:.4f} m", run.est.size() - 1, *m.ape_rmse,
               *m.z_mae);
  return result;
}

eval::MetricsReport cmd_evaluate(const fs::path& est, const fs::path& gt, bool align,
                                 double rpe_delta) {
  return eval::trajectory_metrics(read_tum(est), read_tum(gt), align, rpe_delta);
}

std::map<std::string, eval::Percentiles> cmd_bench(const RunConfig& cfg, const BenchOptions& opt) {
  if (opt.scans < 1 || opt.points < 1) throw InvalidInput("bench needs at least one scan and point");
  const simkit::Terrain terrain(cfg.scenario.terrain);
  const simkit::Motion motion = simkit::make_motion(cfg.scenario, terrain);
  simkit::SensorModel sm = cfg.scenario.sensors;
  const double period = 1.0 / sm.lidar_rate;
  auto rng = simkit::make_stream(cfg.scenario.seed, 2);

  const auto first = motion.pose(0.0);
  elevmap::VoxelGrid grid(cfg.grid, first.rot, first.pos);
  StageTimes times;
  using Clock = std::chrono::steady_clock;
  using Ms = std::chrono::duration<double, std::milli>;
  for (int k = 0; k < opt.scans; ++k) {
    const double t = std::fmod(k * period, cfg.scenario.duration);
    const auto pose = motion.pose(t);
    // Enough rays for the requested number of returns.
    sm.rays_per_scan = opt.points;
    std::vector<Vec3> pts;
    for (int attempt = 0; attempt < 4 && static_cast<int>(pts.size()) < opt.points; ++attempt) {
      pts = simkit::synth_lidar(pose.rot, pose.pos, terrain, sm, k, rng);
      const double fraction = std::max(pts.size(), std::size_t{1}) / double(sm.rays_per_scan);
      sm.rays_per_scan = static_cast<int>(std::ceil(1.05 * opt.points / fraction));
    }
    if (static_cast<int>(pts.size()) > opt.points) pts.resize(opt.points);
    const auto& ext = sm.extrinsics;
    for (auto& p : pts) p = pose.rot * (ext.rot * p + ext.trans) + pose.pos;
    const Vec3 origin = pose.rot * ext.trans + pose.pos;

    grid.move_to(pose.rot, pose.pos);
    const auto t0 = Clock::now();
    grid.integrate_scan(pts, origin, cfg.occupancy);
    const auto t1 = Clock::now();
    const auto hg = elevmap::extract_heights(grid, cfg.occupancy);
    const auto t2 = Clock::now();
    const auto [ix, iy] = hg.column_of(pose.pos.x(), pose.pos.y());
    elevmap::interpolate(hg, ix, iy);
    const auto t3 = Clock::now();
    times["integrate_scan"].push_back(Ms(t1 - t0).count());
    times["extract_heights"].push_back(Ms(t2 - t1).count());
    times["interpolate"].push_back(Ms(t3 - t2).count());
    times["map_update"].push_back(Ms(t3 - t0).count());
    times["points"].push_back(static_cast<double>(pts.size()));
  }
  const auto points = times["points"];
  times.erase("points");
  auto report = eval::timing_report(times);
  const double min_points = *std::min_element(points.begin(), points.end());
  if (min_points < opt.points) {
    spdlog::warn("bench: some scans returned only {} of {} points", min_points, opt.points);
  }
  return report;
}

}  // namespace terramap::app
