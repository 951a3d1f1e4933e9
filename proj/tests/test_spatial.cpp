#include <cmath>
#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "terramap/elevmap/sor.hpp"
#include "terramap/spatial.hpp"

using namespace terramap;
using terramap::testing::random_vec;

namespace {

std::vector<Neighbor> brute_knn(const std::vector<Vec3>& pts, const Vec3& q, std::size_t k,
                                std::size_t exclude) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == exclude) continue;
    all.push_back({i, (pts[i] - q).squaredNorm()});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.index < b.index;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace

TEST(KdTree, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::vector<Vec3> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back(random_vec(rng, 3.0));
  const KdTree tree(pts);
  std::vector<Neighbor> got;
  for (int q = 0; q < 200; ++q) {
    const Vec3 query = random_vec(rng, 3.5);
    for (std::size_t k : {1u, 5u, 17u}) {
      tree.knn(query, k, got);
      const auto want = brute_knn(pts, query, k, KdTree::kNoExclude);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].index, want[i].index);
        EXPECT_EQ(got[i].dist2, want[i].dist2);
      }
    }
  }
}

TEST(KdTree, ExcludeAndDuplicates) {
  std::vector<Vec3> pts(20, Vec3(1, 1, 1));
  pts.push_back(Vec3(2, 1, 1));
  const KdTree tree(pts);
  std::vector<Neighbor> got;
  tree.knn(pts[3], 4, got, 3);
  ASSERT_EQ(got.size(), 4u);
  EXPECT_EQ(got[0].index, 0u);
  EXPECT_EQ(got[3].index, 4u);
}

TEST(PointMap, ThinsAndFindsNeighbours) {
  PointMap map(0.5, 0.1);
  EXPECT_TRUE(map.insert(Vec3(0.01, 0.01, 0.01)));
  EXPECT_FALSE(map.insert(Vec3(0.02, 0.02, 0.02)));
  EXPECT_EQ(map.size(), 1u);

  std::mt19937_64 rng(12);
  std::vector<Vec3> kept{Vec3(0.01, 0.01, 0.01)};
  for (int i = 0; i < 3000; ++i) {
    const Vec3 p = random_vec(rng, 2.0);
    if (map.insert(p)) kept.push_back(p);
  }
  std::vector<Vec3> got;
  for (int q = 0; q < 100; ++q) {
    const Vec3 query = random_vec(rng, 2.0);
    map.knn(query, 5, 1.0, got);
    auto want = brute_knn(kept, query, 5, KdTree::kNoExclude);
    want.erase(std::remove_if(want.begin(), want.end(),
                              [](const Neighbor& n) { return n.dist2 > 1.0; }),
               want.end());
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_DOUBLE_EQ((got[i] - query).squaredNorm(), want[i].dist2);
    }
  }
}

TEST(Sor, KeepsEquivalentNeighbourhoods) {
  // Every point of a regular planar ring sees the same neighbour distances, so
  // the spread is zero and nothing exceeds the mean.
  std::vector<Vec3> ring;
  for (int i = 0; i < 720; ++i) {
    const double a = 2.0 * 3.141592653589793 * i / 720.0;
    ring.emplace_back(std::cos(a), std::sin(a), 0.0);
  }
  EXPECT_EQ(elevmap::sor_filter(ring, 10, 1.0).size(), ring.size());
}

TEST(Sor, DensePlaneLosesOnlyBorderPoints) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<Vec3> plane;
  for (int i = 0; i < 2000; ++i) plane.emplace_back(u(rng), u(rng), 0.0);
  const auto kept = elevmap::sor_filter(plane, 10, 3.0);
  EXPECT_GE(kept.size(), plane.size() * 99 / 100);
}

TEST(Sor, DropsIsolatedPointAndPreservesOrder) {
  std::mt19937_64 rng(13);
  std::vector<Vec3> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(random_vec(rng, 0.5));
  pts.insert(pts.begin() + 100, Vec3(10, 10, 10));
  const auto kept = elevmap::sor_filter(pts, 8, 1.0);
  EXPECT_TRUE(std::find(kept.begin(), kept.end(), Vec3(10, 10, 10)) == kept.end());
  std::size_t cursor = 0;
  for (const auto& p : kept) {
    while (cursor < pts.size() && pts[cursor] != p) ++cursor;
    ASSERT_LT(cursor, pts.size());
  }
}

TEST(Sor, SmallInputUnchanged) {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(5, 5, 5), Vec3(0, 0, 1)};
  EXPECT_EQ(elevmap::sor_filter(pts, 3, 1.0), pts);
}
