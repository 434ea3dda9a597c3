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

#ifndef INFERSIM_BACKEND_HPP_
#define INFERSIM_BACKEND_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infersim/model_profile.hpp"
#include "infersim/request.hpp"
#include "infersim/rng.hpp"
#include "infersim/time.hpp"

namespace infersim {

enum class BackendState {
  kStarting,
  kReady,
  kDraining,
  kStopped,
};

std::string_view to_string(BackendState state);

enum class EnqueueResult {
  kAccepted,
  kRejectedCapacity,
  kNotReady,
};

struct BackendConfig {
  size_t queue_capacity = 1000;
  Duration startup_delay = from_seconds(10.0);
};

void validate(const BackendConfig& config);

/// One simulated GPU inference server: a FIFO queue feeding a single
/// execution unit, with Starting/Ready/Draining/Stopped lifecycle. Service
/// times are sampled at enqueue; since the unit is FIFO with no preemption,
/// that yields the same timestamps as sampling at execution start.
///
/// Mutating calls must use non-decreasing `now` values. advance() applies
/// lifecycle transitions and collects finished work; callers advance before
/// reading states at a new time.
class BackendInstance {
 public:
  BackendInstance(std::string id, const BackendConfig& config, TimePoint now);

  const std::string& id() const { return id_; }
  BackendState state() const { return state_; }

  /// Accepts work when Ready and the queue has room. Queue occupancy counts
  /// requests whose compute has not started strictly before `now`. Throws
  /// std::logic_error when Stopped.
  EnqueueResult enqueue(const InferenceRequest& request,
                        const ModelProfile& profile, TimePoint t_client_send,
                        TimePoint t_gateway_in, TimePoint now, Rng& rng);

  EnqueueResult enqueue(const InferenceRequest& request,
                        const ModelProfile& profile, TimePoint now, Rng& rng) {
    return enqueue(request, profile, now, now, now, rng);
  }

  /// Promotes Starting to Ready when due, pops every request finished by
  /// `now` (t_client_recv left unset for the caller), and finalizes a drain
  /// once the queue is empty and the unit idle.
  std::vector<RequestRecord> advance(TimePoint now);

  /// Ready -> Draining (Stopped at once when already idle and empty).
  /// Starting -> Stopped immediately; Draining/Stopped are left as-is.
  void drain(TimePoint now);

  /// Busy fraction of [t0, t1). Throws std::invalid_argument when t0 >= t1.
  double utilization(TimePoint t0, TimePoint t1) const;

  /// Busy time overlapping [t0, t1), with no lifetime precondition.
  Duration busy_in(TimePoint t0, TimePoint t1) const;

  /// Overlap of [t0, t1) with [spawned_at, stopped_at) ([spawned_at, t1) while
  /// the instance lives).
  Duration lifetime_in(TimePoint t0, TimePoint t1) const;

  /// Earliest pending transition: Ready promotion or next completion.
  std::optional<TimePoint> next_event_time() const;

  size_t queue_depth(TimePoint now) const;
  uint64_t served_count() const { return served_count_; }
  uint64_t accepted_count() const { return accepted_count_; }
  Duration busy_accumulated() const { return busy_accumulated_; }
  TimePoint spawned_at() const { return spawned_at_; }
  TimePoint ready_at() const { return ready_at_; }
  std::optional<TimePoint> stopped_at() const { return stopped_at_; }

 private:
  struct Pending {
    RequestRecord record;
  };

  std::string id_;
  size_t queue_capacity_;
  BackendState state_;
  TimePoint spawned_at_;
  TimePoint ready_at_;
  std::optional<TimePoint> drained_at_;
  std::optional<TimePoint> stopped_at_;
  TimePoint busy_until_;
  Duration busy_accumulated_{};
  uint64_t served_count_ = 0;
  uint64_t accepted_count_ = 0;
  std::deque<Pending> pending_;
  std::vector<std::pair<TimePoint, TimePoint>> busy_intervals_;
};

}  // namespace infersim

#endif  // INFERSIM_BACKEND_HPP_
