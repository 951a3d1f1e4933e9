#include "terramap/elevmap/sor.hpp"

#include <cmath>

#include "terramap/error.hpp"
#include "terramap/spatial.hpp"

namespace terramap::elevmap {

std::vector<Vec3> sor_filter(std::span<const Vec3> points, std::size_t k, double sigma_mult) {
  if (k < 1) throw InvalidInput("sor_filter needs k >= 1");
  if (points.size() < k + 1) return {points.begin(), points.end()};

  const KdTree tree(points);
  std::vector<double> mean_dist(points.size());
  std::vector<Neighbor> nn;
  for (std::size_t i = 0; i < points.size(); ++i) {
    tree.knn(points[i], k, nn, i);
    double sum = 0.0;
    for (const auto& n : nn) sum += std::sqrt(n.dist2);
    mean_dist[i] = sum / static_cast<double>(nn.size());
  }

  double mean = 0.0;
  for (double d : mean_dist) mean += d;
  mean /= static_cast<double>(mean_dist.size());
  double var = 0.0;
  for (double d : mean_dist) var += (d - mean) * (d - mean);
  var /= static_cast<double>(mean_dist.size());
  // The relative slack keeps round-off from splitting points whose
  // neighbourhoods are identical up to the last bits.
  const double threshold = mean + sigma_mult * std::sqrt(var) + 1e-9 * mean;

  std::vector<Vec3> kept;
  kept.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (mean_dist[i] <= threshold) kept.push_back(points[i]);
  }
  return kept;
}

}  // namespace terramap::elevmap
