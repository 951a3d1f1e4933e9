#include "terramap/simkit/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "terramap/error.hpp"

namespace terramap::simkit {

namespace fs = std::filesystem;

Motion make_motion(const ScenarioConfig& cfg, const Terrain& terrain) {
  return Motion(terrain, cfg.gait, cfg.path, cfg.duration);
}

SensorLog run_scenario(const ScenarioConfig& cfg) {
  cfg.sensors.validate();
  const Terrain terrain(cfg.terrain);
  const Motion motion = make_motion(cfg, terrain);
  const PoseFunction pose = [&](double t) { return motion.pose(t); };

  SensorLog log;
  log.imu = synth_imu(pose, cfg.duration, cfg.sensors, cfg.seed);
  log.feet = synth_kinematics(motion, cfg.duration, cfg.sensors, cfg.seed);

  for (const auto& s : log.imu) {
    const PoseSample p = motion.pose(s.t);
    log.ground_truth.push_back({s.t, p.pos, p.rot});
  }

  auto rng = make_stream(cfg.seed, 2);
  const int per_scan = cfg.sensors.imu_ticks_per_scan();
  for (std::size_t k = static_cast<std::size_t>(per_scan); k < log.imu.size(); k += per_scan) {
    Scan scan;
    scan.t = log.imu[k].t;
    scan.index = static_cast<long>(log.scans.size());
    const PoseSample p = motion.pose(scan.t);
    scan.points = synth_lidar(p.rot, p.pos, terrain, cfg.sensors, scan.index, rng);
    log.scans.push_back(std::move(scan));
  }
  log.terrain = sample_heightfield(terrain, cfg.terrain_resolution);
  return log;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

// Splits a CSV row into doubles; throws ParseError when the count differs.
std::vector<double> parse_row(const std::string& line, std::size_t expected,
                              const fs::path& file, int lineno) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) throw ParseError(file.string(), lineno, "bad number '" + cell + "'");
    v.push_back(x);
  }
  if (v.size() != expected) {
    throw ParseError(file.string(), lineno,
                     "expected " + std::to_string(expected) + " fields, got " +
                         std::to_string(v.size()));
  }
  return v;
}

std::string scan_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu.csv", i);
  return buf;
}

}  // namespace

std::vector<fs::path> write_sensor_log(const SensorLog& log, const fs::path& dir) {
  fs::create_directories(dir / "scans");
  std::vector<fs::path> files;
  char buf[512];

  {
    auto out = open_out(dir / "imu.csv");
    out << "t,wx,wy,wz,ax,ay,az\n";
    for (const auto& s : log.imu) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.t, s.gyro.x(),
                    s.gyro.y(), s.gyro.z(), s.accel.x(), s.accel.y(), s.accel.z());
      out << buf;
    }
    files.emplace_back("imu.csv");
  }
  {
    auto out = open_out(dir / "feet.csv");
    out << "t";
    for (int i = 0; i < kNumFeet; ++i) {
      out << ",c" << i << ",px" << i << ",py" << i << ",pz" << i << ",vx" << i << ",vy" << i
          << ",vz" << i;
    }
    out << "\n";
    for (const auto& m : log.feet) {
      std::snprintf(buf, sizeof(buf), "%.9g", m.t);
      out << buf;
      for (const auto& f : m.feet) {
        std::snprintf(buf, sizeof(buf), ",%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", f.contact ? 1 : 0,
                      f.p_rel.x(), f.p_rel.y(), f.p_rel.z(), f.v_rel.x(), f.v_rel.y(),
                      f.v_rel.z());
        out << buf;
      }
      out << "\n";
    }
    files.emplace_back("feet.csv");
  }
  write_tum(dir / "gt.tum", log.ground_truth);
  files.emplace_back("gt.tum");
  {
    auto out = open_out(dir / "terrain.csv");
    out << "x,y,z\n";
    for (const auto& h : log.terrain) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", h.x, h.y, h.z);
      out << buf;
    }
    files.emplace_back("terrain.csv");
  }
  for (std::size_t i = 0; i < log.scans.size(); ++i) {
    const fs::path rel = fs::path("scans") / scan_name(i);
    auto out = open_out(dir / rel);
    std::snprintf(buf, sizeof(buf), "# t=%.9g index=%ld\n", log.scans[i].t, log.scans[i].index);
    out << buf << "x,y,z\n";
    for (const auto& p : log.scans[i].points) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", p.x(), p.y(), p.z());
      out << buf;
    }
    files.push_back(rel);
  }
  return files;
}

SensorLog read_sensor_log(const fs::path& dir) {
  SensorLog log;
  std::string line;

  {
    const fs::path path = dir / "imu.csv";
    auto in = open_in(path);
    std::getline(in, line);
    for (int lineno = 2; std::getline(in, line); ++lineno) {
      const auto v = parse_row(line, 7, path, lineno);
      log.imu.push_back({v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])});
    }
  }
  {
    const fs::path path = dir / "feet.csv";
    auto in = open_in(path);
    std::getline(in, line);
    for (int lineno = 2; std::getline(in, line); ++lineno) {
      const auto v = parse_row(line, 1 + 7 * kNumFeet, path, lineno);
      estimator::FootMeasurement m;
      m.t = v[0];
      for (int i = 0; i < kNumFeet; ++i) {
        const double* f = &v[1 + 7 * i];
        m.feet[i].contact = f[0] != 0.0;
        m.feet[i].p_rel = Vec3(f[1], f[2], f[3]);
        m.feet[i].v_rel = Vec3(f[4], f[5], f[6]);
      }
      log.feet.push_back(m);
    }
  }
  log.ground_truth = read_tum(dir / "gt.tum");
  {
    const fs::path path = dir / "terrain.csv";
    auto in = open_in(path);
    std::getline(in, line);
    for (int lineno = 2; std::getline(in, line); ++lineno) {
      const auto v = parse_row(line, 3, path, lineno);
      log.terrain.push_back({v[0], v[1], v[2]});
    }
  }
  for (std::size_t i = 0;; ++i) {
    const fs::path path = dir / "scans" / scan_name(i);
    if (!fs::exists(path)) break;
    auto in = open_in(path);
    Scan scan;
    std::getline(in, line);
    if (std::sscanf(line.c_str(), "# t=%lf index=%ld", &scan.t, &scan.index) != 2) {
      throw ParseError(path.string(), 1, "missing frame header");
    }
    std::getline(in, line);
    for (int lineno = 3; std::getline(in, line); ++lineno) {
      const auto v = parse_row(line, 3, path, lineno);
      scan.points.emplace_back(v[0], v[1], v[2]);
    }
    log.scans.push_back(std::move(scan));
  }
  return log;
}

}  // namespace terramap::simkit
