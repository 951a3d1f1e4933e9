#include "terramap/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/SVD>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "terramap/error.hpp"

namespace terramap::eval {

namespace {

StampedPose interpolate(const StampedPose& a, const StampedPose& b, double t) {
  const double s = (t - a.t) / (b.t - a.t);
  StampedPose out;
  out.t = t;
  out.pos = a.pos + s * (b.pos - a.pos);
  out.rot = a.rot * so3_exp(s * so3_log(a.rot.transpose() * b.rot));
  return out;
}

double rms(double sum_sq, std::size_t n) { return std::sqrt(sum_sq / static_cast<double>(n)); }

}  // namespace

std::vector<PosePair> associate(const Trajectory& est, const Trajectory& gt) {
  check_trajectory(est);
  check_trajectory(gt);
  std::vector<PosePair> out;
  if (est.empty()) throw InvalidInput("estimated trajectory is empty");
  std::size_t k = 0;
  for (const auto& g : gt) {
    if (g.t < est.front().t || g.t > est.back().t) continue;
    while (k + 1 < est.size() && est[k + 1].t < g.t) ++k;
    PosePair p;
    p.t = g.t;
    p.gt = g;
    if (est[k].t == g.t) {
      p.est = est[k];
    } else if (k + 1 < est.size() && est[k + 1].t == g.t) {
      p.est = est[k + 1];
    } else {
      p.est = interpolate(est[k], est[k + 1], g.t);
    }
    out.push_back(p);
  }
  if (out.empty()) throw InvalidInput("trajectories do not overlap in time");
  return out;
}

RigidTransform align_positions(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size() || src.empty()) {
    throw InvalidInput("alignment needs equally sized, non-empty point sets");
  }
  const double n = static_cast<double>(src.size());
  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= n;
  mu_d /= n;
  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) cov += (dst[i] - mu_d) * (src[i] - mu_s).transpose();

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  RigidTransform t;
  t.rot = svd.matrixU() * d * svd.matrixV().transpose();
  t.trans = mu_d - t.rot * mu_s;
  return t;
}

double ape(const Trajectory& est, const Trajectory& gt, bool align) {
  const auto pairs = associate(est, gt);
  RigidTransform t;
  if (align) {
    std::vector<Vec3> src, dst;
    for (const auto& p : pairs) {
      src.push_back(p.est.pos);
      dst.push_back(p.gt.pos);
    }
    t = align_positions(src, dst);
  }
  double sum = 0.0;
  for (const auto& p : pairs) sum += (t.apply(p.est.pos) - p.gt.pos).squaredNorm();
  return rms(sum, pairs.size());
}

RpeResult rpe(const Trajectory& est, const Trajectory& gt, double delta) {
  if (!(delta > 0.0)) throw InvalidInput(fmt::format("rpe delta must be positive, got {}", delta));
  const auto pairs = associate(est, gt);
  RpeResult r;
  double sum = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    j = std::max(j, i + 1);
    while (j < pairs.size() && pairs[j].t < pairs[i].t + delta) ++j;
    if (j >= pairs.size()) break;
    const auto& a = pairs[i];
    const auto& b = pairs[j];
    const Mat3 rg = a.gt.rot.transpose() * b.gt.rot;
    const Vec3 tg = a.gt.rot.transpose() * (b.gt.pos - a.gt.pos);
    const Vec3 te = a.est.rot.transpose() * (b.est.pos - a.est.pos);
    // Translation of inv(dG) * dE.
    sum += (rg.transpose() * (te - tg)).squaredNorm();
    ++r.pairs;
  }
  r.rmse = r.pairs ? rms(sum, r.pairs) : std::nan("");
  return r;
}

ZErrorSeries z_error_series(const Trajectory& est, const Trajectory& gt) {
  ZErrorSeries s;
  double sum = 0.0;
  for (const auto& p : associate(est, gt)) {
    const double e = std::abs(p.est.pos.z() - p.gt.pos.z());
    s.t.push_back(p.t);
    s.abs_err.push_back(e);
    sum += e;
  }
  s.mae = sum / static_cast<double>(s.t.size());
  return s;
}

void write_z_error_csv(std::ostream& out, const ZErrorSeries& series) {
  out << "t,abs_err_m\n";
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    out << fmt::format("{:.9g},{:.9g}\n", series.t[i], series.abs_err[i]);
  }
}

bool MapAccuracy::defined() const { return std::isfinite(rmse); }

MapAccuracy map_rmse(const elevmap::HeightGrid& est, const HeightTruth& truth) {
  MapAccuracy m;
  const std::size_t total = static_cast<std::size_t>(est.nx) * est.ny;
  if (total == 0) throw InvalidInput("height grid has no columns");
  double sum = 0.0;
  std::size_t known = 0;
  for (int ix = 0; ix < est.nx; ++ix) {
    for (int iy = 0; iy < est.ny; ++iy) {
      const std::size_t i = est.index(ix, iy);
      if (!est.known[i]) continue;
      const double e = est.height[i] - truth(est.x_of(ix), est.y_of(iy));
      sum += e * e;
      ++known;
    }
  }
  m.coverage = static_cast<double>(known) / static_cast<double>(total);
  m.rmse = known ? rms(sum, known) : std::nan("");
  return m;
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw InvalidInput("percentile of an empty sample");
  if (q < 0.0 || q > 1.0) throw InvalidInput(fmt::format("percentile rank {} outside [0, 1]", q));
  std::sort(samples.begin(), samples.end());
  const double rank = q * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (rank - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

std::map<std::string, Percentiles> timing_report(const StageTimes& times) {
  std::map<std::string, Percentiles> out;
  for (const auto& [stage, samples] : times) {
    if (samples.empty()) {
      spdlog::warn("timing: stage '{}' has no samples, omitted", stage);
      continue;
    }
    out[stage] = {percentile(samples, 0.50), percentile(samples, 0.90), percentile(samples, 0.99),
                  samples.size()};
  }
  return out;
}

MetricsReport trajectory_metrics(const Trajectory& est, const Trajectory& gt, bool align,
                                 double rpe_delta) {
  MetricsReport r;
  r.aligned = align;
  r.ape_rmse = ape(est, gt, align);
  const RpeResult rp = rpe(est, gt, rpe_delta);
  if (rp.pairs) r.rpe_rmse = rp.rmse;
  r.z_mae = z_error_series(est, gt).mae;
  return r;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

nlohmann::ordered_json to_json(const std::map<std::string, Percentiles>& timing) {
  auto j = nlohmann::ordered_json::object();
  for (const auto& [stage, p] : timing) {
    j[stage] = {{"p50_ms", p.p50}, {"p90_ms", p.p90}, {"p99_ms", p.p99}, {"samples", p.count}};
  }
  return j;
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["ape_rmse"] = opt(report.ape_rmse);
  j["rpe_rmse"] = opt(report.rpe_rmse);
  j["z_mae"] = opt(report.z_mae);
  j["map_rmse"] = opt(report.map_rmse);
  j["map_coverage"] = opt(report.map_coverage);
  j["aligned"] = report.aligned;
  j["timing"] = to_json(report.timing);
  return j;
}

}  // namespace terramap::eval
