#include "terramap/spatial.hpp"

#include <algorithm>
#include <numeric>

namespace terramap {

namespace {

constexpr std::uint32_t kLeafSize = 8;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

int KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node_id, const Vec3& q, std::size_t k, std::size_t exclude, double& bound,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      if (idx == exclude) continue;
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 > bound) continue;
      const Neighbor cand{idx, d2};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      } else {
        continue;
      }
      if (heap.size() == k) bound = std::min(bound, heap.front().dist2);
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, k, exclude, bound, heap);
  // Equal-distance candidates may sit exactly on the split plane.
  if (diff * diff <= bound) search(far, q, k, exclude, bound, heap);
}

void KdTree::knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out, std::size_t exclude,
                 double max_dist2) const {
  out.clear();
  if (k == 0 || nodes_.empty()) return;
  double bound = max_dist2;
  search(0, query, k, exclude, bound, out);
  std::sort(out.begin(), out.end(), closer);
}

PointMap::PointMap(double bucket_size, double min_spacing)
    : bucket_size_(bucket_size), min_spacing_(min_spacing) {}

bool PointMap::insert(const Vec3& p) {
  if (!occupied_.insert(cell_of(p, min_spacing_)).second) return false;
  buckets_[cell_of(p, bucket_size_)].push_back(p);
  ++count_;
  return true;
}

void PointMap::knn(const Vec3& query, std::size_t k, double max_radius,
                   std::vector<Vec3>& out) const {
  out.clear();
  if (k == 0 || count_ == 0) return;
  const CellKey c = cell_of(query, bucket_size_);
  const double max_r2 = max_radius * max_radius;
  const int max_ring = static_cast<int>(std::ceil(max_radius / bucket_size_));

  std::vector<std::pair<double, Vec3>> best;
  best.reserve(k + 1);
  auto consider = [&](const Vec3& p) {
    const double d2 = (p - query).squaredNorm();
    if (d2 > max_r2) return;
    if (best.size() == k && d2 >= best.back().first) return;
    auto it = std::upper_bound(best.begin(), best.end(), d2,
                               [](double v, const auto& e) { return v < e.first; });
    best.insert(it, {d2, p});
    if (best.size() > k) best.pop_back();
  };

  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int dx = -ring; dx <= ring; ++dx) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          auto it = buckets_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == buckets_.end()) continue;
          for (const auto& p : it->second) consider(p);
        }
      }
    }
    // Every unvisited bucket is at least ring * bucket_size away.
    const double covered = ring * bucket_size_;
    if (best.size() == k && best.back().first <= covered * covered) break;
  }
  out.reserve(best.size());
  for (const auto& e : best) out.push_back(e.second);
}

}  // namespace terramap
