#pragma once

#include <array>
#include <functional>
#include <string_view>

#include "terramap/rewards/snapshot.hpp"

namespace terramap::rewards {

struct FootPointClassification {
  int n1 = 0;  ///< centre point
  int n2 = 0;  ///< axis-aligned points at d1
  int n3 = 0;  ///< diagonal points at d2

  friend bool operator==(const FootPointClassification&, const FootPointClassification&) = default;
};

using FootClassifications = std::array<FootPointClassification, kNumFeet>;

/// Terrain height at a world (x, y). NaN marks unknown terrain; unknown points
/// are never counted.
using HeightLookup = std::function<double(double x, double y)>;

struct StencilParams {
  double d1 = 0.05;
  double d2 = 0.070710678118654752;  ///< sqrt(0.005)
  double drop = -0.2;                ///< a point counts when h - z_foot < drop
};

/// Nine-point stencil around the foot: the centre, four points on the map
/// axes at d1 and four on the diagonals at d2.
FootPointClassification classify_foot_points(const Vec3& foot, const HeightLookup& terrain,
                                             const StencilParams& params = {});

FootClassifications classify_feet(const RobotSnapshot& s, const HeightLookup& terrain,
                                  const StencilParams& params = {});

/// Sum over feet in contact of n2 + 2 n3.
double reward_feet_center(const std::array<bool, kNumFeet>& contact,
                          const FootClassifications& cls);

/// Sum of (t_air - 0.5) over the feet flagged as touching down.
double reward_feet_air_time(const std::array<double, kNumFeet>& air_time,
                            const std::array<bool, kNumFeet>& touchdown);

/// A foot touches down on the tick it is in contact with nonzero accumulated
/// air time.
std::array<bool, kNumFeet> touchdown_flags(const RobotSnapshot& s);

/// 1 if any foot has |f_xy| > 4 |f_z|, else 0.
double reward_feet_stumble(const std::array<Vec3, kNumFeet>& force);

enum class Term {
  kLinVelTracking,
  kAngVelTracking,
  kLinVelZ,
  kAngVelXY,
  kTorque,
  kActionRate,
  kJointAcc,
  kCollision,
  kOrientation,
  kJointMotion,
  kFeetAirTime,
  kFeetStumble,
  kFeetCenter,
};
inline constexpr int kNumTerms = 13;

std::string_view term_name(Term t);

struct RewardWeights {
  std::array<double, kNumTerms> w{1.0,  0.5,   -2.0, -0.05, -1e-5, -0.01, -2.5e-7,
                                  1.0,  -0.2,  -0.02, 1.0,  -1.0,  -0.01};
  double& operator[](Term t) { return w[static_cast<int>(t)]; }
  double operator[](Term t) const { return w[static_cast<int>(t)]; }
};

struct RewardBreakdown {
  std::array<double, kNumTerms> raw{};       ///< term value before weighting
  std::array<double, kNumTerms> weighted{};  ///< weight * raw
  double total = 0.0;                        ///< sum of weighted, in term order

  double raw_of(Term t) const { return raw[static_cast<int>(t)]; }
  double weighted_of(Term t) const { return weighted[static_cast<int>(t)]; }
};

RewardBreakdown reward_total(const RobotSnapshot& s, const FootClassifications& cls,
                             const RewardWeights& weights = {});

}  // namespace terramap::rewards
