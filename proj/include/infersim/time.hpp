/* Copyright 2026 The Infersim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef INFERSIM_TIME_HPP_
#define INFERSIM_TIME_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace infersim {

/// Simulation clock: integer nanoseconds since experiment start. Both virtual
/// and wall-clock modes map onto this representation, so timestamps replay
/// exactly and never accumulate float drift.
struct SimClock {
  using rep = int64_t;
  using period = std::nano;
  using duration = std::chrono::nanoseconds;
  using time_point = std::chrono::time_point<SimClock, duration>;
  static constexpr bool is_steady = true;
};

using Duration = SimClock::duration;
using TimePoint = SimClock::time_point;

inline constexpr TimePoint kRunStart{};

inline double to_seconds(Duration d) {
  return std::chrono::duration<double>(d).count();
}

inline double to_millis(Duration d) {
  return std::chrono::duration<double, std::milli>(d).count();
}

inline Duration from_seconds(double s) {
  return std::chrono::round<Duration>(std::chrono::duration<double>(s));
}

inline Duration from_millis(double ms) {
  return std::chrono::round<Duration>(std::chrono::duration<double, std::milli>(ms));
}

/// Monotonic time source shared by every component. `now` never decreases
/// across reads, in either mode.
class TimeSource {
 public:
  enum class Mode { kVirtual, kWallClock };

  virtual ~TimeSource() = default;
  virtual TimePoint now() = 0;
  virtual Mode mode() const = 0;
};

/// Virtual time. Advances only when the event loop says so; two runs with the
/// same config and seed see identical timestamps.
class VirtualClock final : public TimeSource {
 public:
  TimePoint now() override { return now_; }
  Mode mode() const override { return Mode::kVirtual; }

  void advance_to(TimePoint t);

 private:
  TimePoint now_{};
};

/// Wall clock with a compression factor: one virtual second takes
/// `time_scale` real seconds. Readings are translated back into virtual
/// nanoseconds so records and metrics look the same in both modes.
class ScaledWallClock final : public TimeSource {
 public:
  explicit ScaledWallClock(double time_scale = 1.0);

  TimePoint now() override;
  Mode mode() const override { return Mode::kWallClock; }

  std::chrono::steady_clock::time_point real_deadline(TimePoint t) const;
  void sleep_until(TimePoint t) const;
  void sleep_for(Duration d) const;
  double time_scale() const { return scale_; }

 private:
  std::chrono::steady_clock::time_point start_;
  double scale_;
};

/// Deterministic discrete-event queue for virtual mode. Events fire in
/// (timestamp, scheduling order); scheduling order is itself deterministic
/// because the simulation is single-threaded.
class EventQueue {
 public:
  using Handler = std::function<void()>;

  void at(TimePoint t, Handler h);

  bool empty() const { return heap_.empty(); }
  size_t pending() const { return heap_.size(); }

  /// Pops and runs the earliest event, advancing the clock to it.
  bool step(VirtualClock& clock);

  /// Runs events until the queue drains.
  void run(VirtualClock& clock);

 private:
  struct Event {
    TimePoint t;
    uint64_t seq;
    Handler fn;
  };
  struct After {
    bool operator()(const Event& a, const Event& b) const {
      return a.t == b.t ? a.seq > b.seq : a.t > b.t;
    }
  };

  std::vector<Event> heap_;
  uint64_t next_seq_ = 0;
};

}  // namespace infersim

#endif  // INFERSIM_TIME_HPP_
