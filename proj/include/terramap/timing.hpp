#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

namespace terramap {

/// Wall-clock samples per pipeline stage, in milliseconds.
using StageTimes = std::map<std::string, std::vector<double>>;

class ScopedTimer {
 public:
  ScopedTimer(StageTimes& sink, std::string stage)
      : sink_(sink), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    const auto end = std::chrono::steady_clock::now();
    sink_[stage_].push_back(std::chrono::duration<double, std::milli>(end - start_).count());
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  StageTimes& sink_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace terramap
