#pragma once

#include <deque>
#include <string_view>

#include "terramap/rewards/snapshot.hpp"

namespace terramap::rewards {

enum class TerminationReason { kNone, kBodyCollision, kFootBelowThreshold, kTimeout };

std::string_view reason_name(TerminationReason r);

struct TerminationParams {
  double foot_floor = -0.2;  ///< m, world z
  double trapped_limit = 20.0;
};

struct Termination {
  bool terminate = false;
  TerminationReason reason = TerminationReason::kNone;
};

/// Checks body contact first, then foot height, then the trapped timer.
Termination termination_check(const RobotSnapshot& s, double trapped_time,
                              const TerminationParams& params = {});

/// Tracks how long the robot has been stuck: the mean planar speed over the
/// trailing window stays below min_speed while a nonzero command is active.
class TrapMonitor {
 public:
  explicit TrapMonitor(double window = 20.0, double min_speed = 0.05)
      : window_(window), min_speed_(min_speed) {}

  /// Feeds one tick and returns the trapped duration in seconds.
  double update(double t, const RobotSnapshot& s);
  void reset();

 private:
  struct Sample {
    double t;
    double dt;
    double speed;
  };
  double window_;
  double min_speed_;
  std::deque<Sample> samples_;
  double last_t_ = 0.0;
  bool have_last_ = false;
  double active_since_ = 0.0;
  double distance_ = 0.0;  ///< sum of speed * dt over the window
  double span_ = 0.0;      ///< sum of dt over the window
};

}  // namespace terramap::rewards
