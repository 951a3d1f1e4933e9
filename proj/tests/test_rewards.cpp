#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "terramap/error.hpp"
#include "terramap/rewards/observation.hpp"
#include "terramap/rewards/rewards.hpp"
#include "terramap/rewards/termination.hpp"

using namespace terramap;
using namespace terramap::rewards;

namespace {

constexpr double kDrop = -0.5;

HeightLookup flat(double z) {
  return [z](double, double) { return z; };
}

// Stencil coordinates written out by hand, independent of the implementation.
struct StencilPoint {
  double dx, dy;
  int type;
};
const std::array<StencilPoint, 9> kStencil{{{0.0, 0.0, 1},
                                            {0.05, 0.0, 2},
                                            {-0.05, 0.0, 2},
                                            {0.0, 0.05, 2},
                                            {0.0, -0.05, 2},
                                            {0.05, 0.05, 3},
                                            {-0.05, 0.05, 3},
                                            {0.05, -0.05, 3},
                                            {-0.05, -0.05, 3}}};

FootPointClassification enumerate(const Vec3& foot, const HeightLookup& terrain) {
  FootPointClassification c;
  for (const auto& p : kStencil) {
    const double h = terrain(foot.x() + p.dx, foot.y() + p.dy) - foot.z();
    if (!(h < -0.2)) continue;
    (p.type == 1 ? c.n1 : p.type == 2 ? c.n2 : c.n3) += 1;
  }
  return c;
}

RobotSnapshot random_snapshot(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RobotSnapshot s;
  s.command_lin = Vec3(n(rng), n(rng), 0.0);
  s.command_yaw_rate = n(rng);
  s.lin_vel = Vec3(n(rng), n(rng), 0.3 * n(rng));
  s.ang_vel = Vec3(n(rng), n(rng), n(rng));
  for (int j = 0; j < kNumJoints; ++j) {
    s.q[j] = n(rng);
    s.dq[j] = n(rng);
    s.ddq[j] = 100.0 * n(rng);
    s.torque[j] = 10.0 * n(rng);
    s.action[j] = n(rng);
    s.last_action[j] = n(rng);
    s.default_q[j] = n(rng);
  }
  for (int i = 0; i < kNumFeet; ++i) {
    s.foot_force[i] = Vec3(10.0 * n(rng), 10.0 * n(rng), 10.0 * n(rng));
    s.contact[i] = u(rng) < 0.5;
    s.air_time[i] = u(rng);
    s.foot_pos[i] = Vec3(n(rng), n(rng), 0.0);
  }
  s.collisions = static_cast<int>(u(rng) * 3);
  s.orientation_xy = Vec2(0.1 * n(rng), 0.1 * n(rng));
  return s;
}

FootClassifications random_classes(std::mt19937& rng) {
  std::uniform_int_distribution<int> b(0, 1), q(0, 4);
  FootClassifications c;
  for (auto& f : c) f = {b(rng), q(rng), q(rng)};
  return c;
}

// Term-by-term recomputation written as plain loops.
double oracle_total(const RobotSnapshot& s, const FootClassifications& cls) {
  double lin = 0.0;
  for (int k = 0; k < 2; ++k) lin += std::pow(s.command_lin[k] - s.lin_vel[k], 2);
  const double yaw = s.command_yaw_rate - s.ang_vel[2];
  double torque = 0.0, rate = 0.0, acc = 0.0, motion = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    torque += s.torque[j] * s.torque[j];
    rate += std::pow(s.action[j] - s.last_action[j], 2);
    acc += s.ddq[j] * s.ddq[j];
    motion += std::fabs(s.q[j] - s.default_q[j]);
  }
  double air = 0.0, center = 0.0, stumble = 0.0;
  for (int i = 0; i < kNumFeet; ++i) {
    if (s.contact[i] && s.air_time[i] > 0.0) air += s.air_time[i] - 0.5;
    if (s.contact[i]) center += cls[i].n2 + 2.0 * cls[i].n3;
    const Vec3& f = s.foot_force[i];
    if (std::hypot(f[0], f[1]) > 4.0 * std::fabs(f[2])) stumble = 1.0;
  }
  return 1.0 * std::exp(-4.0 * lin) + 0.5 * std::exp(-4.0 * yaw * yaw) -
         2.0 * s.lin_vel[2] * s.lin_vel[2] -
         0.05 * (s.ang_vel[0] * s.ang_vel[0] + s.ang_vel[1] * s.ang_vel[1]) - 1e-5 * torque -
         0.01 * rate - 2.5e-7 * acc - 1.0 * s.collisions - 0.2 * s.orientation_xy.squaredNorm() -
         0.02 * motion + air - stumble - 0.01 * center;
}

RobotSnapshot perfect_tracking() {
  RobotSnapshot s;
  s.command_lin = Vec3(0.6, -0.2, 0.0);
  s.command_yaw_rate = 0.3;
  s.lin_vel = Vec3(0.6, -0.2, 0.0);
  s.ang_vel = Vec3(0.0, 0.0, 0.3);
  return s;
}

}  // namespace

TEST(FootPoints, FlatTerrainAtFootHeight) {
  EXPECT_EQ(classify_foot_points(Vec3(0.3, 0.1, 0.0), flat(0.0)), (FootPointClassification{0, 0, 0}));
}

TEST(FootPoints, ObliqueEdgeThroughFoot) {
  // Edge through the foot with its downhill normal 22.5 deg off the x axis:
  // two axis points and two diagonal points fall on the dropped side.
  const double a = M_PI / 8.0;
  const Vec3 foot(1.0, 2.0, 0.0);
  const HeightLookup edge = [&](double x, double y) {
    return std::cos(a) * (x - foot.x()) + std::sin(a) * (y - foot.y()) > 0.0 ? kDrop : 0.0;
  };
  const auto c = classify_foot_points(foot, edge);
  EXPECT_EQ(c, (FootPointClassification{0, 2, 2}));
  EXPECT_EQ(c, enumerate(foot, edge));
}

TEST(FootPoints, AxisAlignedEdge) {
  const HeightLookup edge = [](double x, double) { return x > 0.0 ? kDrop : 0.0; };
  EXPECT_EQ(classify_foot_points(Vec3::Zero(), edge), (FootPointClassification{0, 1, 2}));
}

TEST(FootPoints, NarrowBeamAndPost) {
  const HeightLookup beam = [](double, double y) { return std::fabs(y) < 0.02 ? 0.0 : kDrop; };
  EXPECT_EQ(classify_foot_points(Vec3::Zero(), beam), (FootPointClassification{0, 2, 4}));

  const HeightLookup post = [](double x, double y) {
    return std::fabs(x) < 0.02 && std::fabs(y) < 0.02 ? 0.0 : kDrop;
  };
  EXPECT_EQ(classify_foot_points(Vec3::Zero(), post), (FootPointClassification{0, 4, 4}));
}

TEST(FootPoints, FootOverGap) {
  EXPECT_EQ(classify_foot_points(Vec3::Zero(), flat(-1.0)), (FootPointClassification{1, 4, 4}));
}

TEST(FootPoints, HeightsAreFootRelative) {
  // Standing on the floor of a pit: nothing is below the foot.
  EXPECT_EQ(classify_foot_points(Vec3(0.0, 0.0, -0.5), flat(-0.5)),
            (FootPointClassification{0, 0, 0}));
  // Exactly -0.2 is not below the threshold.
  EXPECT_EQ(classify_foot_points(Vec3(0.0, 0.0, 0.25), flat(0.05)),
            (FootPointClassification{0, 0, 0}));
}

TEST(FootPoints, UnknownTerrainIsNotCounted) {
  EXPECT_EQ(classify_foot_points(Vec3::Zero(),
                                 flat(std::numeric_limits<double>::quiet_NaN())),
            (FootPointClassification{0, 0, 0}));
}

TEST(FootPoints, RandomTerrainMatchesEnumeration) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double kx = 10 * u(rng), ky = 10 * u(rng), off = u(rng);
    const HeightLookup terrain = [=](double x, double y) {
      return 0.3 * std::sin(kx * x + off) + 0.3 * std::cos(ky * y);
    };
    const Vec3 foot(u(rng), u(rng), 0.2 * u(rng));
    const auto c = classify_foot_points(foot, terrain);
    EXPECT_EQ(c, enumerate(foot, terrain));
    EXPECT_GE(c.n1, 0);
    EXPECT_LE(c.n1, 1);
    EXPECT_LE(c.n2, 4);
    EXPECT_LE(c.n3, 4);
  }
}

TEST(FeetCenter, Examples) {
  FootClassifications cls{};
  EXPECT_EQ(reward_feet_center({true, true, true, true}, cls), 0.0);
  cls[1] = {0, 2, 2};
  EXPECT_EQ(reward_feet_center({false, true, false, false}, cls), 6.0);
  cls[2] = {0, 4, 0};
  EXPECT_EQ(reward_feet_center({false, false, false, false}, cls), 0.0);
}

TEST(FeetAirTime, Examples) {
  EXPECT_EQ(reward_feet_air_time({0.5, 0.5, 0.5, 0.5}, {true, true, true, true}), 0.0);
  EXPECT_NEAR(reward_feet_air_time({0.7, 0.3, 0.0, 0.0}, {true, false, false, false}), 0.2,
              1e-15);
  EXPECT_EQ(reward_feet_air_time({0.7, 0.9, 0.2, 0.1}, {false, false, false, false}), 0.0);
}

TEST(FeetAirTime, TouchdownNeedsContactAndAirTime) {
  RobotSnapshot s;
  s.contact = {true, true, false, false};
  s.air_time = {0.4, 0.0, 0.6, 0.0};
  const auto td = touchdown_flags(s);
  EXPECT_TRUE(td[0]);
  EXPECT_FALSE(td[1]);
  EXPECT_FALSE(td[2]);
  EXPECT_FALSE(td[3]);
}

TEST(FeetStumble, Examples) {
  std::array<Vec3, kNumFeet> f;
  f.fill(Vec3(0, 0, 50));
  EXPECT_EQ(reward_feet_stumble(f), 0.0);
  f[2] = Vec3(10, 0, 2);
  EXPECT_EQ(reward_feet_stumble(f), 1.0);
  f[2] = Vec3(8, 0, 2);
  EXPECT_EQ(reward_feet_stumble(f), 0.0);
  f[2] = Vec3(0, 8, -2);
  EXPECT_EQ(reward_feet_stumble(f), 0.0);
  f[3] = Vec3(-6, 6, 2);
  EXPECT_EQ(reward_feet_stumble(f), 1.0);
}

TEST(RewardTotal, PerfectTracking) {
  const auto b = reward_total(perfect_tracking(), {});
  EXPECT_EQ(b.raw_of(Term::kLinVelTracking), 1.0);
  EXPECT_EQ(b.raw_of(Term::kAngVelTracking), 1.0);
  EXPECT_EQ(b.total, 1.5);
}

TEST(RewardTotal, LinearTrackingError) {
  RobotSnapshot s = perfect_tracking();
  s.lin_vel.x() += 0.3;
  s.lin_vel.y() -= 0.4;
  EXPECT_NEAR(reward_total(s, {}).raw_of(Term::kLinVelTracking), 0.36787944117144233, 1e-15);
}

TEST(RewardTotal, StumbleCostsOne) {
  RobotSnapshot s = perfect_tracking();
  const double base = reward_total(s, {}).total;
  s.foot_force[0] = Vec3(10, 0, 2);
  EXPECT_NEAR(reward_total(s, {}).total, base - 1.0, 1e-15);
}

TEST(RewardTotal, WeightsAsPublished) {
  const RewardWeights w;
  EXPECT_EQ(w[Term::kTorque], -1e-5);
  EXPECT_EQ(w[Term::kJointAcc], -2.5e-7);
  EXPECT_EQ(w[Term::kCollision], 1.0);
  EXPECT_EQ(w[Term::kFeetCenter], -0.01);
  RobotSnapshot s;
  s.collisions = 2;
  EXPECT_EQ(reward_total(s, {}).weighted_of(Term::kCollision), -2.0);
}

TEST(RewardTotal, MatchesOracleAndBreakdownSums) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = random_snapshot(rng);
    const auto cls = random_classes(rng);
    const auto b = reward_total(s, cls);
    EXPECT_NEAR(b.total, oracle_total(s, cls), 1e-9 * std::max(1.0, std::fabs(b.total)));
    const double sum = std::accumulate(b.weighted.begin(), b.weighted.end(), 0.0);
    EXPECT_NEAR(sum, b.total, 1e-12);
  }
}

TEST(RewardTotal, TrackingTermsBounded) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto b = reward_total(random_snapshot(rng), {});
    for (Term t : {Term::kLinVelTracking, Term::kAngVelTracking}) {
      EXPECT_GT(b.raw_of(t), 0.0);
      EXPECT_LE(b.raw_of(t), 1.0);
    }
  }
}

TEST(RewardTotal, FootPermutationInvariant) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_snapshot(rng);
    const auto cls = random_classes(rng);
    std::array<int, kNumFeet> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    RobotSnapshot p = s;
    FootClassifications pc;
    for (int i = 0; i < kNumFeet; ++i) {
      p.foot_force[i] = s.foot_force[perm[i]];
      p.contact[i] = s.contact[perm[i]];
      p.air_time[i] = s.air_time[perm[i]];
      p.foot_pos[i] = s.foot_pos[perm[i]];
      pc[i] = cls[perm[i]];
    }
    EXPECT_NEAR(reward_total(p, pc).total, reward_total(s, cls).total, 1e-12);
  }
}

TEST(RewardTotal, NoContactNoFeetCenter) {
  std::mt19937 rng(9);
  RobotSnapshot s = random_snapshot(rng);
  s.contact = {false, false, false, false};
  const auto cls = classify_feet(s, flat(-3.0));
  EXPECT_EQ(cls[0], (FootPointClassification{1, 4, 4}));
  EXPECT_EQ(reward_total(s, cls).raw_of(Term::kFeetCenter), 0.0);
}

TEST(RewardTotal, Deterministic) {
  std::mt19937 rng(13);
  const auto s = random_snapshot(rng);
  const auto cls = random_classes(rng);
  const auto a = reward_total(s, cls);
  const auto b = reward_total(s, cls);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof(a)), 0);
}

TEST(RewardTotal, TermNamesUnique) {
  std::vector<std::string_view> names;
  for (int k = 0; k < kNumTerms; ++k) names.push_back(term_name(static_cast<Term>(k)));
  std::sort(names.begin(), names.end());
  EXPECT_EQ(std::unique(names.begin(), names.end()), names.end());
}

TEST(Snapshot, Validate) {
  RobotSnapshot s;
  EXPECT_NO_THROW(s.validate());
  s.air_time[1] = -0.1;
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(Observation, ZeroSnapshot) {
  const auto f = observation_frame(RobotSnapshot{});
  ObservationFrame expected = ObservationFrame::Zero();
  expected[5] = -1.0;
  EXPECT_EQ(f, expected);
}

TEST(Observation, SlicingRoundTrip) {
  std::mt19937 rng(17);
  const auto s = random_snapshot(rng);
  const auto f = observation_frame(s);
  EXPECT_EQ(f.segment<3>(0), s.ang_vel);
  EXPECT_EQ(f.segment<3>(3), s.projected_gravity);
  EXPECT_EQ(f[6], s.command_lin.x());
  EXPECT_EQ(f[7], s.command_lin.y());
  EXPECT_EQ(f[8], s.command_yaw_rate);
  EXPECT_EQ(f.segment<12>(9), s.q);
  EXPECT_EQ(f.segment<12>(21), s.dq);
  EXPECT_EQ(f.segment<12>(33), s.last_action);
}

TEST(Observation, HistoryPaddingAndOrder) {
  ObservationHistory h;
  std::vector<ObservationFrame> frames;
  for (int k = 0; k < 8; ++k) frames.push_back(ObservationFrame::Constant(k));

  RobotSnapshot s;
  const auto o = assemble_observation(s, h);
  for (int age = 0; age < obs::kHistory; ++age) {
    EXPECT_EQ(o.history.segment<obs::kSize>(age * obs::kSize), o.frame);
  }

  h.reset();
  for (int k = 0; k < 8; ++k) h.push(frames[k]);
  const auto st = h.stacked();
  for (int age = 0; age < obs::kHistory; ++age) {
    EXPECT_EQ(st.segment<obs::kSize>(age * obs::kSize), frames[7 - age]);
  }

  h.reset();
  for (int k = 0; k < 3; ++k) h.push(frames[k]);
  EXPECT_EQ(h.at(0), frames[2]);
  EXPECT_EQ(h.at(2), frames[0]);
  EXPECT_EQ(h.at(5), frames[0]);
}

TEST(Observation, PrivilegedLayout) {
  RobotSnapshot s;
  s.lin_vel = Vec3(1, 2, 3);
  s.contact = {true, false, true, false};
  PhysicalParams p;
  p.link_masses << 4, 5, 6, 7;
  p.friction = 8;
  p.com_offset = Vec2(9, 10);
  p.disturbance = Vec2(11, 12);
  p.kp = 13;
  p.kd = 14;
  p.motor_strength.setConstant(15);
  p.motor_offset.setConstant(16);
  ObservationHistory h;
  const auto v = assemble_observation(s, h, p).privileged.to_vector();
  ASSERT_EQ(v.size(), 42);
  PrivilegedVector expected;
  expected << 1, 2, 3, 1, 0, 1, 0, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14,
      Eigen::VectorXd::Constant(12, 15), Eigen::VectorXd::Constant(12, 16);
  EXPECT_EQ(v, expected);
}

TEST(Termination, Examples) {
  RobotSnapshot s;
  for (auto& p : s.foot_pos) p = Vec3(0, 0, 0.02);
  EXPECT_FALSE(termination_check(s, 3.0).terminate);

  RobotSnapshot low = s;
  low.foot_pos[2].z() = -0.25;
  const auto t1 = termination_check(low, 0.0);
  EXPECT_TRUE(t1.terminate);
  EXPECT_EQ(t1.reason, TerminationReason::kFootBelowThreshold);

  const auto t2 = termination_check(s, 20.0);
  EXPECT_TRUE(t2.terminate);
  EXPECT_EQ(t2.reason, TerminationReason::kTimeout);
  EXPECT_FALSE(termination_check(s, 19.99).terminate);

  RobotSnapshot hit = s;
  hit.base_contact = true;
  EXPECT_EQ(termination_check(hit, 0.0).reason, TerminationReason::kBodyCollision);

  low.foot_pos[2].z() = -0.2;
  EXPECT_FALSE(termination_check(low, 0.0).terminate);
}

TEST(TrapMonitor, StuckWithCommand) {
  TrapMonitor m;
  RobotSnapshot s;
  s.command_lin = Vec3(0.5, 0, 0);
  s.lin_vel = Vec3(0.01, 0.02, 0);
  double trapped = 0.0;
  for (int k = 0; k <= 1000; ++k) trapped = m.update(k * 0.02, s);
  EXPECT_DOUBLE_EQ(trapped, 20.0);
  EXPECT_EQ(termination_check(s, trapped).reason, TerminationReason::kTimeout);
}

TEST(TrapMonitor, MovingOrIdle) {
  TrapMonitor moving;
  RobotSnapshot s;
  s.command_lin = Vec3(0.5, 0, 0);
  s.lin_vel = Vec3(0.4, 0, 0);
  for (int k = 0; k <= 1500; ++k) EXPECT_EQ(moving.update(k * 0.02, s), 0.0);

  TrapMonitor idle;
  RobotSnapshot z;
  for (int k = 0; k <= 1500; ++k) EXPECT_EQ(idle.update(k * 0.02, z), 0.0);
}

TEST(TrapMonitor, StopsAfterMoving) {
  TrapMonitor m;
  RobotSnapshot s;
  s.command_lin = Vec3(0.5, 0, 0);
  s.lin_vel = Vec3(0.5, 0, 0);
  int k = 0;
  for (; k <= 500; ++k) EXPECT_EQ(m.update(k * 0.02, s), 0.0);
  s.lin_vel.setZero();
  // 5 m travelled up to t = 10 s; the trailing 20 s mean drops below
  // 0.05 m/s once less than 1 m of that travel is still inside the window.
  double trapped = 0.0;
  int first = -1;
  for (; k <= 3000 && first < 0; ++k) {
    trapped = m.update(k * 0.02, s);
    if (trapped > 0.0) first = k;
  }
  ASSERT_GT(first, 0);
  EXPECT_NEAR(first * 0.02, 10.0 + 20.0 - 2.0, 0.05);
  EXPECT_DOUBLE_EQ(trapped, 20.0);
}
