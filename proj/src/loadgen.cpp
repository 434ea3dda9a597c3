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

#include "infersim/loadgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace infersim {

void validate(const PhaseSchedule& schedule) {
  if (schedule.phases.empty()) {
    throw std::invalid_argument("schedule needs at least one phase");
  }
  for (const Phase& phase : schedule.phases) {
    if (phase.duration <= Duration::zero()) {
      throw std::invalid_argument("phase durations must be > 0");
    }
  }
  if (schedule.client.model.empty()) {
    throw std::invalid_argument("schedule client model must be named");
  }
  if (schedule.client.batch_size < 1) {
    throw std::invalid_argument("schedule client batch_size must be >= 1");
  }
  if (schedule.client.think_time < Duration::zero()) {
    throw std::invalid_argument("schedule client think_time must be >= 0");
  }
}

Duration total_duration(const PhaseSchedule& schedule) {
  Duration total{};
  for (const Phase& phase : schedule.phases) total += phase.duration;
  return total;
}

uint32_t clients_at(const PhaseSchedule& schedule, TimePoint t) {
  if (t < kRunStart) return 0;
  TimePoint phase_start = kRunStart;
  for (const Phase& phase : schedule.phases) {
    TimePoint phase_end = phase_start + phase.duration;
    if (t < phase_end) return phase.client_count;
    phase_start = phase_end;
  }
  return 0;
}

Duration retry_backoff(Duration think_time) {
  return think_time > Duration::zero() ? think_time : from_millis(100.0);
}

Calibration calibrate(const ModelProfile& profile) {
  validate(profile);
  if (profile.jitter_sigma != 0.0) {
    throw std::invalid_argument("calibration requires a jitter-free profile");
  }
  if (profile.base_time == Duration::zero() &&
      profile.per_item_time == Duration::zero()) {
    throw std::invalid_argument(
        "calibration requires a profile with nonzero time constants");
  }

  const Duration target = from_millis(50.0);
  uint32_t batch = 1;
  if (profile.per_item_time > Duration::zero()) {
    double ideal =
        to_seconds(target - profile.base_time) / to_seconds(profile.per_item_time);
    long rounded = std::lround(ideal);
    batch = rounded < 1 ? 1u : static_cast<uint32_t>(rounded);
  }

  Calibration result;
  result.batch_size = batch;
  result.think_time = profile.base_time + batch * profile.per_item_time;
  return result;
}

}  // namespace infersim
