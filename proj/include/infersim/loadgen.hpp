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

#ifndef INFERSIM_LOADGEN_HPP_
#define INFERSIM_LOADGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "infersim/model_profile.hpp"
#include "infersim/time.hpp"

namespace infersim {

/// What every concurrent client sends and how long it pauses between a
/// response and its next request.
struct ClientProfile {
  std::string model;
  uint32_t batch_size = 1;
  Duration think_time{};
  std::string token;
  uint64_t payload_size = 0;

  bool operator==(const ClientProfile&) const = default;
};

struct Phase {
  Duration duration{};
  uint32_t client_count = 0;

  bool operator==(const Phase&) const = default;
};

/// Timed sequence of concurrent-client counts, e.g. 1 -> 10 -> 1.
struct PhaseSchedule {
  std::vector<Phase> phases;
  ClientProfile client;

  bool operator==(const PhaseSchedule&) const = default;
};

void validate(const PhaseSchedule& schedule);

Duration total_duration(const PhaseSchedule& schedule);

/// Client count in force at time t (relative to run start); 0 at or past the
/// schedule end.
uint32_t clients_at(const PhaseSchedule& schedule, TimePoint t);

/// Backoff before retrying a rejected request: the think time, or 100 ms for
/// think-free clients so retries cannot spin.
Duration retry_backoff(Duration think_time);

struct Calibration {
  uint32_t batch_size = 1;
  Duration think_time{};
};

/// Picks (batch_size, think_time) such that one client's offered load stays
/// below a single replica's capacity while ten clients' exceeds it: batch
/// aims the service time at 50 ms and think_time equals the resulting
/// service time (per-client duty cycle 1/2). Requires a jitter-free profile
/// with nonzero time constants.
Calibration calibrate(const ModelProfile& profile);

}  // namespace infersim

#endif  // INFERSIM_LOADGEN_HPP_
