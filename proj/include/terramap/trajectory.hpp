#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "terramap/manifold.hpp"

namespace terramap {

struct StampedPose {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();
  Rotation rot = Rotation::Identity();
};

/// Poses with strictly increasing timestamps.
using Trajectory = std::vector<StampedPose>;

/// Throws InvalidInput unless timestamps strictly increase.
void check_trajectory(const Trajectory& traj);

/// TUM lines `t tx ty tz qx qy qz qw`, 9 significant digits.
void write_tum(std::ostream& out, const Trajectory& traj);
void write_tum(const std::filesystem::path& path, const Trajectory& traj);

/// Blank lines and lines starting with '#' are skipped. Throws ParseError with
/// the offending line number on malformed or non-increasing lines.
Trajectory read_tum(std::istream& in, const std::string& name);
Trajectory read_tum(const std::filesystem::path& path);

}  // namespace terramap
