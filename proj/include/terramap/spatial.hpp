#pragma once

// Nearest-neighbour search structures shared by the estimator (plane
// correspondences) and the mapping front end (outlier removal).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "terramap/manifold.hpp"

namespace terramap {

struct Neighbor {
  std::size_t index = 0;
  double dist2 = 0.0;
};

/// Static k-d tree with exact k-nearest-neighbour queries. Results are sorted
/// by distance; equal distances are ordered by point index.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }

  /// Writes up to k neighbours of query into out. The point with index
  /// `exclude` (if any) is skipped.
  void knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out,
           std::size_t exclude = kNoExclude,
           double max_dist2 = std::numeric_limits<double>::infinity()) const;

  static constexpr std::size_t kNoExclude = std::numeric_limits<std::size_t>::max();

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  int build(std::uint32_t begin, std::uint32_t end);
  void search(int node, const Vec3& q, std::size_t k, std::size_t exclude, double& bound,
              std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

struct CellKey {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint32_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint32_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

inline CellKey cell_of(const Vec3& p, double size) {
  return {static_cast<std::int32_t>(std::floor(p.x() / size)),
          static_cast<std::int32_t>(std::floor(p.y() / size)),
          static_cast<std::int32_t>(std::floor(p.z() / size))};
}

/// Incrementally growing point map for scan-to-map registration. Points are
/// thinned to at most one per `min_spacing` voxel and bucketed on a coarser
/// grid for radius-bounded k-NN queries.
class PointMap {
 public:
  explicit PointMap(double bucket_size = 0.5, double min_spacing = 0.1);

  /// Returns false if the point's thinning voxel is already occupied.
  bool insert(const Vec3& p);
  std::size_t size() const { return count_; }

  /// Up to k nearest map points within max_radius, nearest first.
  void knn(const Vec3& query, std::size_t k, double max_radius, std::vector<Vec3>& out) const;

 private:
  double bucket_size_;
  double min_spacing_;
  std::size_t count_ = 0;
  std::unordered_map<CellKey, std::vector<Vec3>, CellKeyHash> buckets_;
  std::unordered_set<CellKey, CellKeyHash> occupied_;
};

}  // namespace terramap
