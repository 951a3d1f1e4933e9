#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "terramap/elevmap/voxel_grid.hpp"
#include "terramap/timing.hpp"
#include "terramap/trajectory.hpp"

namespace terramap::eval {

/// Estimated pose interpolated at a ground-truth timestamp.
struct PosePair {
  double t = 0.0;
  StampedPose est;
  StampedPose gt;
};

/// Pairs every ground-truth sample inside the estimate's time range with the
/// estimate interpolated there (linear in position, geodesic in rotation).
/// Throws InvalidInput if the time ranges do not overlap.
std::vector<PosePair> associate(const Trajectory& est, const Trajectory& gt);

/// Rigid transform x -> rot * x + trans.
struct RigidTransform {
  Rotation rot = Rotation::Identity();
  Vec3 trans = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rot * x + trans; }
};

/// Least-squares rigid transform taking `src` positions onto `dst`
/// (Kabsch/Umeyama without scale). Needs at least one point; with fewer than
/// three non-collinear points the rotation is not unique.
RigidTransform align_positions(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

/// Position RMSE at the ground-truth timestamps. With align, the estimate is
/// first rigidly registered onto the ground truth.
double ape(const Trajectory& est, const Trajectory& gt, bool align = false);

struct RpeResult {
  double rmse = 0.0;  ///< NaN when no pair spans delta
  std::size_t pairs = 0;
};

/// RMSE of relative translation errors between (ground-truth) samples i and j,
/// j being the first sample with t_j >= t_i + delta. Throws InvalidInput for
/// delta <= 0.
RpeResult rpe(const Trajectory& est, const Trajectory& gt, double delta = 1.0);

struct ZErrorSeries {
  std::vector<double> t;
  std::vector<double> abs_err;
  double mae = 0.0;
};

ZErrorSeries z_error_series(const Trajectory& est, const Trajectory& gt);
void write_z_error_csv(std::ostream& out, const ZErrorSeries& series);

/// Ground-truth surface height at a map-frame (x, y).
using HeightTruth = std::function<double(double, double)>;

struct MapAccuracy {
  double rmse = 0.0;  ///< NaN when no column is known
  double coverage = 0.0;
  bool defined() const;
};

/// RMSE over known columns, sampled at column centres.
MapAccuracy map_rmse(const elevmap::HeightGrid& est, const HeightTruth& truth);

struct Percentiles {
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  std::size_t count = 0;
};

/// Linear interpolation between closest ranks: value at rank q (n - 1).
double percentile(std::vector<double> samples, double q);

/// Percentiles per stage; empty stages are logged and left out.
std::map<std::string, Percentiles> timing_report(const StageTimes& times);

struct MetricsReport {
  std::optional<double> ape_rmse;
  std::optional<double> rpe_rmse;
  std::optional<double> z_mae;
  std::optional<double> map_rmse;
  std::optional<double> map_coverage;
  bool aligned = false;
  std::map<std::string, Percentiles> timing;
};

/// Trajectory metrics for one estimate.
MetricsReport trajectory_metrics(const Trajectory& est, const Trajectory& gt, bool align,
                                 double rpe_delta = 1.0);

/// Missing or undefined metrics are written as null.
nlohmann::ordered_json to_json(const MetricsReport& report);
nlohmann::ordered_json to_json(const std::map<std::string, Percentiles>& timing);

}  // namespace terramap::eval
