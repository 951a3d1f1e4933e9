#pragma once

#include <array>
#include <vector>

#include "terramap/manifold.hpp"
#include "terramap/simkit/terrain.hpp"

namespace terramap::simkit {

/// Leg order used throughout: FL, FR, RL, RR.
enum Leg { kFL = 0, kFR = 1, kRL = 2, kRR = 3 };

struct GaitParams {
  double frequency = 2.0;  ///< strides per second
  double duty = 0.6;       ///< stance fraction of each stride
  double step_length = 0.3;  ///< m, foothold search reach is half of it
  double base_height = 0.30;
  double swing_height = 0.08;
  /// Phase offsets; (FL, RR) and (FR, RL) half a stride apart for a trot.
  std::array<double, kNumFeet> phase_offset{0.0, 0.5, 0.5, 0.0};
  /// Body-frame hip positions where feet rest under the body.
  std::array<Vec3, kNumFeet> hip{Vec3(0.19, 0.13, 0.0), Vec3(0.19, -0.13, 0.0),
                                 Vec3(-0.19, 0.13, 0.0), Vec3(-0.19, -0.13, 0.0)};
  /// Periodic body motion on top of the path, at the stride frequency.
  double bob = 0.0;    ///< m, vertical amplitude (at twice the frequency)
  double roll = 0.0;   ///< rad
  double pitch = 0.0;  ///< rad

  void validate() const;
};

struct GaitState {
  std::array<double, kNumFeet> phase{};  ///< in [0, 1), stance while phase < duty
  std::array<bool, kNumFeet> contact{};
};

/// Contact pattern t seconds after the gait started.
GaitState gait_schedule(const GaitParams& gp, double t);

/// Straight walk from `start` along `heading`. The speed ramps up and down
/// with a quintic profile over ramp_time at each end. length <= 0 walks until
/// the scenario ends.
struct PathCommand {
  Vec3 start = Vec3::Zero();  ///< z is ignored; the base rides at base_height
  double heading = 0.0;
  double speed = 0.5;
  double length = 0.0;
  double ramp_time = 1.0;
  double start_time = 1.0;  ///< standing still before this

  bool moving() const { return speed > 0.0; }
  /// Walking time from start_time to the end of the path (infinite when
  /// length <= 0).
  double walk_duration() const;
};

struct PoseSample {
  double t = 0.0;
  Rotation rot = Rotation::Identity();
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();      ///< world frame
  Vec3 acc = Vec3::Zero();      ///< world frame
  Vec3 ang_vel = Vec3::Zero();  ///< body frame
};

struct Stance {
  double t_begin;
  double t_end;
  Vec3 pos;  ///< world foothold, on the terrain surface
};

/// Base motion plus per-foot stance sequence for one scenario.
class Motion {
 public:
  /// Throws InfeasibleScenario when a stance has no safe foothold within
  /// reach, InvalidInput for bad parameters.
  Motion(const Terrain& terrain, const GaitParams& gait, const PathCommand& path,
             double duration);

  double duration() const { return duration_; }
  const GaitParams& gait() const { return gait_; }
  const PathCommand& path() const { return path_; }

  /// Analytic base pose, twice differentiable in time.
  PoseSample pose(double t) const;

  bool contact(int leg, double t) const;
  /// World foot position; stance feet are fixed, swing feet follow an arc.
  Vec3 foot(int leg, double t) const;
  /// Seconds since lift-off, 0 in stance before the first swing.
  double air_time(int leg, double t) const;

  const std::vector<Stance>& stances(int leg) const { return stances_[leg]; }

  /// Path arc length covered at t, with speed and acceleration.
  void arc(double t, double& s, double& ds, double& dds) const;

 private:
  Vec3 foothold(int leg, double t_mid) const;
  int stance_index(int leg, double t) const;

  Terrain terrain_;
  GaitParams gait_;
  PathCommand path_;
  double duration_;
  std::array<std::vector<Stance>, kNumFeet> stances_;
};

}  // namespace terramap::simkit
