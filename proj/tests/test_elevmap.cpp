#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/dense_grid.hpp"
#include "support/oracles.hpp"
#include "terramap/elevmap/voxel_grid.hpp"
#include "terramap/error.hpp"

using namespace terramap;
using namespace terramap::elevmap;
using terramap::testing::compare_window;
using terramap::testing::DenseOccupancy;
using terramap::testing::Key;
using terramap::testing::random_vec;

namespace {

// Jittered so that no ray passes exactly through a cell edge, where the
// traversal and the slab-test oracle may legitimately pick different cells.
std::vector<Vec3> flat_ground_points(const Vec3& center, double z, double half, double step) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> jitter(-0.2 * step, 0.2 * step);
  std::vector<Vec3> pts;
  for (double x = -half; x <= half + 1e-9; x += step)
    for (double y = -half; y <= half + 1e-9; y += step)
      pts.emplace_back(center.x() + x + jitter(rng), center.y() + y + jitter(rng), z - 0.01);
  return pts;
}

}  // namespace

TEST(Occupancy, Validation) {
  EXPECT_NO_THROW(OccupancyParams{}.validate());
  OccupancyParams op;
  op.p_hit = 0.4;
  EXPECT_THROW(op.validate(), InvalidInput);
  op = OccupancyParams{};
  op.tau_occ = 4.0;
  EXPECT_THROW(op.validate(), InvalidInput);
}

TEST(GridConfig, DefaultCells) {
  EXPECT_EQ(GridConfig{}.cells(), Eigen::Vector3i(60, 60, 40));
  GridConfig bad;
  bad.size.x() = 3.01;
  EXPECT_THROW(bad.cells(), InvalidInput);
}

TEST(VoxelGrid, NormalizeStaysInRange) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> g(-100000, 100000);
  const Eigen::Vector3i n(60, 60, 40);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3i l = normalize({g(rng), g(rng), g(rng)}, n);
    ASSERT_TRUE((l.array() >= 0).all() && (l.array() < n.array()).all());
  }
}

TEST(VoxelGrid, EmptyScanLeavesGridUnchanged) {
  VoxelGrid grid;
  grid.integrate_scan({}, Vec3::Zero(), OccupancyParams{});
  EXPECT_EQ(grid.stored_cells(), 0u);
  EXPECT_EQ(grid.frame(), 0u);
}

TEST(VoxelGrid, SingleHitOnFreshCell) {
  VoxelGrid grid;
  const std::vector<Vec3> pts{Vec3(0.012, 0.013, 0.014)};
  grid.integrate_scan(pts, Vec3(0.011, 0.012, 0.013), OccupancyParams{});
  ASSERT_EQ(grid.stored_cells(), 1u);
  EXPECT_NEAR(*grid.logodds({0, 0, 0}), std::log(0.7 / 0.3), 1e-15);
  EXPECT_NEAR(*grid.logodds({0, 0, 0}), 0.8473, 1e-4);
}

TEST(VoxelGrid, RayMarksMissesThenHit) {
  VoxelGrid grid;
  const std::vector<Vec3> pts{Vec3(0.51, 0.01, 0.01)};
  grid.integrate_scan(pts, Vec3(0.01, 0.01, 0.01), OccupancyParams{});
  EXPECT_EQ(grid.stored_cells(), 11u);
  for (int x = 0; x < 10; ++x) EXPECT_NEAR(*grid.logodds({x, 0, 0}), std::log(0.4 / 0.6), 1e-15);
  EXPECT_NEAR(*grid.logodds({10, 0, 0}), std::log(0.7 / 0.3), 1e-15);
}

TEST(VoxelGrid, LogOddsStayClamped) {
  VoxelGrid grid;
  const OccupancyParams op;
  const std::vector<Vec3> pts(50, Vec3(0.51, 0.01, 0.01));
  for (int k = 0; k < 5; ++k) grid.integrate_scan(pts, Vec3(0.01, 0.01, 0.01), op);
  EXPECT_EQ(*grid.logodds({10, 0, 0}), op.t_high);
  EXPECT_EQ(*grid.logodds({3, 0, 0}), op.t_low);
  for (const auto& c : grid.stored()) {
    EXPECT_GE(c.logodds, op.t_low);
    EXPECT_LE(c.logodds, op.t_high);
  }
}

TEST(VoxelGrid, PointsOutsideWindowAreClipped) {
  VoxelGrid grid;  // window x index range [-30, 30)
  const std::vector<Vec3> pts{Vec3(5.01, 0.01, 0.01)};
  grid.integrate_scan(pts, Vec3(0.01, 0.01, 0.01), OccupancyParams{});
  EXPECT_EQ(grid.stored_cells(), 30u);
  EXPECT_FALSE(grid.logodds({30, 0, 0}));
  EXPECT_NEAR(*grid.logodds({29, 0, 0}), std::log(0.4 / 0.6), 1e-15);
}

TEST(VoxelGrid, RandomRaysMatchDenseOracle) {
  std::mt19937_64 rng(42);
  const OccupancyParams op;
  VoxelGrid grid;
  DenseOccupancy dense(grid.window_min(), grid.cells());
  for (int scan = 0; scan < 10; ++scan) {
    const Vec3 origin = random_vec(rng, 0.6);
    std::vector<Vec3> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(origin + random_vec(rng, 1.0));
    grid.integrate_scan(pts, origin, op);
    dense.integrate(pts, origin, grid.resolution(), op, [](const Key&) { return true; });
  }
  EXPECT_LE(compare_window(grid, dense), 1e-12);
}

TEST(VoxelGrid, OriginOutsideWindowMatchesDenseOracle) {
  std::mt19937_64 rng(46);
  const OccupancyParams op;
  VoxelGrid grid;
  DenseOccupancy dense(grid.window_min(), grid.cells());
  for (int scan = 0; scan < 5; ++scan) {
    const Vec3 origin = Vec3(2.2, -0.4, 1.5) + random_vec(rng, 0.2);
    std::vector<Vec3> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(random_vec(rng, 1.4));
    grid.integrate_scan(pts, origin, op);
    dense.integrate(pts, origin, grid.resolution(), op, [](const Key&) { return true; });
  }
  EXPECT_LE(compare_window(grid, dense), 1e-12);
}

TEST(VoxelGrid, IdentitySlideKeepsEverything) {
  VoxelGrid grid;
  grid.integrate_scan(flat_ground_points(Vec3::Zero(), 0.0, 1.0, 0.1), Vec3(0.01, 0.02, 0.41),
                      OccupancyParams{});
  const auto before = grid.stored();
  grid.slide(Rotation::Identity(), Vec3::Zero());
  const auto after = grid.stored();
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(before[i].key, after[i].key);
    EXPECT_EQ(before[i].logodds, after[i].logodds);
  }
}

TEST(VoxelGrid, FullWindowExitClearsAll) {
  VoxelGrid grid;
  grid.integrate_scan(flat_ground_points(Vec3::Zero(), 0.0, 1.4, 0.1), Vec3(0.01, 0.02, 0.41),
                      OccupancyParams{});
  ASSERT_GT(grid.stored_cells(), 0u);
  grid.slide(Rotation::Identity(), Vec3(3.0, 0, 0));
  EXPECT_EQ(grid.stored_cells(), 0u);
}

TEST(VoxelGrid, HalfMetreSlideKeepsOverlap) {
  const OccupancyParams op;
  VoxelGrid grid;
  std::vector<terramap::testing::WalkStep> steps;
  steps.emplace_back(grid.window_min());
  const auto pts = flat_ground_points(Vec3::Zero(), 0.0, 1.4, 0.05);
  grid.integrate_scan(pts, Vec3(0.01, 0.02, 0.41), op);
  steps.back().has_scan = true;
  steps.back().points = pts;
  steps.back().origin = Vec3(0.01, 0.02, 0.41);
  const auto before = grid.stored();

  grid.slide(so3_exp(Vec3(0, 0, 0.3)), Vec3(0.5, 0, 0));
  steps.emplace_back(grid.window_min());
  EXPECT_EQ(grid.window_min().x(), -30 + 10);

  for (const auto& c : before) {
    const auto v = grid.logodds(c.key);
    if (c.key.x >= -20) {
      ASSERT_TRUE(v);
      EXPECT_EQ(*v, c.logodds);
    } else {
      EXPECT_FALSE(v);
    }
  }
  const auto oracle =
      terramap::testing::rebuild_final_window(steps, grid.cells(), grid.resolution(), op);
  EXPECT_LE(compare_window(grid, oracle), 1e-12);
}

TEST(VoxelGrid, RandomWalkMatchesRebuild) {
  std::mt19937_64 rng(43);
  const OccupancyParams op;
  GridConfig cfg;
  cfg.size = Vec3(1.0, 1.0, 0.6);
  cfg.resolution = 0.05;
  VoxelGrid grid(cfg);
  std::vector<terramap::testing::WalkStep> steps;
  steps.emplace_back(grid.window_min());
  Rotation rot = Rotation::Identity();
  Vec3 pos = Vec3::Zero();
  for (int k = 0; k < 80; ++k) {
    const Rotation dr = so3_exp(random_vec(rng, 0.2));
    const Vec3 dt = random_vec(rng, 0.15);
    grid.slide(dr, dt);
    pos = pos + rot * dt;
    rot = orthonormalize(rot * dr);
    terramap::testing::WalkStep step(grid.window_min());
    if (k % 2 == 0) {
      step.has_scan = true;
      step.origin = pos + random_vec(rng, 0.05);
      for (int i = 0; i < 30; ++i) step.points.push_back(step.origin + random_vec(rng, 0.6));
      grid.integrate_scan(step.points, step.origin, op);
    }
    steps.push_back(step);
  }
  const auto oracle =
      terramap::testing::rebuild_final_window(steps, grid.cells(), grid.resolution(), op);
  EXPECT_LE(compare_window(grid, oracle), 1e-12);
  EXPECT_LE(grid.stored_cells(), grid.capacity());
}

// ------------------------------------------------------------------ heights

TEST(Heights, EmptyGridAllUnknown) {
  const HeightGrid hg = extract_heights(VoxelGrid{}, OccupancyParams{});
  EXPECT_EQ(hg.nx, 60);
  EXPECT_EQ(hg.ny, 60);
  EXPECT_EQ(hg.known_count(), 0u);
}

TEST(Heights, TopFaceOfOccupiedCell) {
  OccupancyParams op;
  VoxelGrid grid;  // z window [-20, 20): base at -1.0 m
  const double r = grid.resolution();
  const int gz = grid.window_min().z() + 3;
  const Vec3 p(0.01, 0.01, (gz + 0.5) * r);
  const std::vector<Vec3> pts(3, p);
  grid.integrate_scan(pts, p, op);
  const HeightGrid hg = extract_heights(grid, op);
  const auto [ix, iy] = hg.column_of(p.x(), p.y());
  ASSERT_TRUE(hg.known[hg.index(ix, iy)]);
  EXPECT_NEAR(hg.height[hg.index(ix, iy)] - hg.base_z, 0.20, 1e-12);
  EXPECT_EQ(hg.known_count(), 1u);
}

TEST(Heights, StackedTakesUpper) {
  OccupancyParams op;
  VoxelGrid grid;
  const std::vector<Vec3> low(3, Vec3(0.01, 0.01, 0.11));
  const std::vector<Vec3> high(3, Vec3(0.01, 0.01, 0.31));
  grid.integrate_scan(low, low[0], op);
  grid.integrate_scan(high, high[0], op);
  const HeightGrid hg = extract_heights(grid, op);
  const auto [ix, iy] = hg.column_of(0.01, 0.01);
  EXPECT_NEAR(hg.height[hg.index(ix, iy)], 0.35, 1e-12);
}

// ------------------------------------------------------------ interpolation

TEST(Interpolate, WorkedRay) {
  std::vector<double> h{0.5, NAN, NAN, 0.2};
  std::vector<std::uint8_t> k{1, 0, 0, 1};
  const std::vector<double> d{1, 2, 3, 4};
  interpolate_ray(h, k, d);
  EXPECT_EQ(h, (std::vector<double>{0.5, 0.5, 0.2, 0.2}));
}

TEST(Interpolate, WorkedRayOnRaster) {
  HeightGrid hg(5, 1, 0.05, 0, 0, 0.0);
  hg.height = {0.0, 0.5, NAN, NAN, 0.2};
  hg.known = {1, 1, 0, 0, 1};
  const HeightGrid out = interpolate(hg, 0, 0);
  EXPECT_EQ(out.height[2], 0.5);
  EXPECT_EQ(out.height[3], 0.2);
}

TEST(Interpolate, TieGoesToLowerHeight) {
  std::vector<double> h{0.5, NAN, 0.2};
  std::vector<std::uint8_t> k{1, 0, 1};
  const std::vector<double> d{1, 2, 3};
  interpolate_ray(h, k, d);
  EXPECT_EQ(h[1], 0.2);
}

TEST(Interpolate, OneSidedAndEmptyRays) {
  std::vector<double> h{NAN, NAN, 0.3, NAN};
  std::vector<std::uint8_t> k{0, 0, 1, 0};
  const std::vector<double> d{1, 2, 3, 4};
  interpolate_ray(h, k, d);
  EXPECT_EQ(h, (std::vector<double>{0.3, 0.3, 0.3, 0.3}));

  HeightGrid empty(20, 20, 0.05, 0, 0, 0.0);
  EXPECT_EQ(interpolate(empty, 10, 10).known_count(), 0u);
}

TEST(Interpolate, FullyKnownUnchanged) {
  std::mt19937_64 rng(44);
  HeightGrid hg(30, 30, 0.05, 0, 0, 0.0);
  for (std::size_t i = 0; i < hg.height.size(); ++i) {
    hg.height[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
    hg.known[i] = 1;
  }
  const HeightGrid out = interpolate(hg, 15, 15);
  EXPECT_EQ(out.height, hg.height);
}

TEST(Interpolate, IdempotentAndPreservesKnown) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    const int nx = 5 + trial % 30, ny = 5 + (trial * 7) % 30;
    HeightGrid hg(nx, ny, 0.05, 0, 0, 0.0);
    const double p_known = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
    for (std::size_t i = 0; i < hg.height.size(); ++i) {
      if (std::bernoulli_distribution(p_known)(rng)) {
        hg.height[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
        hg.known[i] = 1;
      }
    }
    const int ox = static_cast<int>(rng() % nx), oy = static_cast<int>(rng() % ny);
    const HeightGrid once = interpolate(hg, ox, oy);
    const HeightGrid twice = interpolate(once, ox, oy);
    for (std::size_t i = 0; i < hg.height.size(); ++i) {
      if (hg.known[i]) {
        ASSERT_EQ(once.height[i], hg.height[i]);
      }
      ASSERT_EQ(once.known[i], twice.known[i]);
      if (once.known[i]) {
        ASSERT_EQ(once.height[i], twice.height[i]);
      }
    }
  }
}

// -------------------------------------------------------------- policy grid

namespace {

HeightGrid flat_heights(double h) {
  HeightGrid hg(60, 60, 0.05, -30, -30, -1.0);
  std::fill(hg.height.begin(), hg.height.end(), h);
  std::fill(hg.known.begin(), hg.known.end(), 1);
  return hg;
}

}  // namespace

TEST(PolicyGrid, FlatGround) {
  const auto v = policy_grid_sample(flat_heights(0.0), 0.3, Vec3(0.02, -0.03, 0.30));
  EXPECT_EQ(v.size(), 187u);
  for (double x : v) EXPECT_NEAR(x, 0.30, 1e-9);
}

TEST(PolicyGrid, GapCellAndUnknownSentinel) {
  HeightGrid hg = flat_heights(0.0);
  const auto [ix, iy] = hg.column_of(0.01, 0.01);
  hg.height[hg.index(ix, iy)] = -0.5;
  const auto v = policy_grid_sample(hg, 0.0, Vec3(0.01, 0.01, 0.30));
  EXPECT_NEAR(v[8 * 11 + 5], 0.80, 1e-12);

  HeightGrid unknown(60, 60, 0.05, -30, -30, -1.0);
  for (double x : policy_grid_sample(unknown, 0.0, Vec3(0, 0, 0.3))) EXPECT_EQ(x, 1.0);
}

TEST(PolicyGrid, LatticeFollowsYaw) {
  HeightGrid hg = flat_heights(0.0);
  // Raise a strip along +y; with yaw = 90 deg the forward rows look along +y.
  for (int ix = 0; ix < hg.nx; ++ix) {
    for (int iy = 0; iy < hg.ny; ++iy) {
      if (hg.y_of(iy) > 0.55) hg.height[hg.index(ix, iy)] = 0.1;
    }
  }
  const auto v = policy_grid_sample(hg, std::numbers::pi / 2, Vec3(0.01, 0.01, 0.3));
  EXPECT_NEAR(v[16 * 11 + 5], 0.2, 1e-12);  // 0.8 m ahead
  EXPECT_NEAR(v[0 * 11 + 5], 0.3, 1e-12);   // 0.8 m behind
}

TEST(Export, CsvFormats) {
  HeightGrid hg(2, 1, 0.05, 0, 0, 0.0);
  hg.height = {0.125, NAN};
  hg.known = {1, 0};
  EXPECT_EQ(height_grid_csv(hg),
            "x_index,y_index,x_m,y_m,height_m,known\n"
            "0,0,0.025000,0.025000,0.125000,1\n"
            "1,0,0.075000,0.025000,nan,0\n");

  VoxelGrid grid;
  const std::vector<Vec3> pts{Vec3(0.012, 0.013, 0.014)};
  grid.integrate_scan(pts, pts[0], OccupancyParams{});
  EXPECT_EQ(voxel_csv(grid), "gx,gy,gz,logodds\n0,0,0,0.847298\n");
}
