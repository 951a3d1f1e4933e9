#include "terramap/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>

#include "terramap/error.hpp"

namespace terramap {

void check_trajectory(const Trajectory& traj) {
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (!(traj[i].t > traj[i - 1].t)) {
      throw InvalidInput("trajectory timestamps must strictly increase (sample " +
                         std::to_string(i) + ")");
    }
  }
}

void write_tum(std::ostream& out, const Trajectory& traj) {
  char buf[256];
  for (const auto& p : traj) {
    Eigen::Quaterniond q(p.rot);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n", p.t, p.pos.x(),
                  p.pos.y(), p.pos.z(), q.x(), q.y(), q.z(), q.w());
    out << buf;
  }
}

void write_tum(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_tum(out, traj);
}

Trajectory read_tum(std::istream& in, const std::string& name) {
  Trajectory traj;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ss(line);
    double v[8];
    for (int k = 0; k < 8; ++k) {
      if (!(ss >> v[k])) {
        throw ParseError(name, lineno, "expected 8 numeric fields, got " + std::to_string(k));
      }
    }
    std::string rest;
    if (ss >> rest) throw ParseError(name, lineno, "trailing data '" + rest + "'");

    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (!(q.norm() > 0.5 && q.norm() < 1.5)) {
      throw ParseError(name, lineno, "quaternion is not unit length");
    }
    q.normalize();
    StampedPose p;
    p.t = v[0];
    p.pos = Vec3(v[1], v[2], v[3]);
    p.rot = q.toRotationMatrix();
    if (!traj.empty() && !(p.t > traj.back().t)) {
      throw ParseError(name, lineno, "timestamp does not increase");
    }
    traj.push_back(p);
  }
  return traj;
}

Trajectory read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_tum(in, path.string());
}

}  // namespace terramap
