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

#include "infersim/backend.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace infersim {

std::string_view to_string(BackendState state) {
  switch (state) {
    case BackendState::kStarting:
      return "starting";
    case BackendState::kReady:
      return "ready";
    case BackendState::kDraining:
      return "draining";
    case BackendState::kStopped:
      return "stopped";
  }
  return "unknown";
}

void validate(const BackendConfig& config) {
  if (config.queue_capacity == 0) {
    throw std::invalid_argument("backend queue_capacity must be >= 1");
  }
  if (config.startup_delay < Duration::zero()) {
    throw std::invalid_argument("backend startup_delay must be >= 0");
  }
}

BackendInstance::BackendInstance(std::string id, const BackendConfig& config,
                                 TimePoint now)
    : id_(std::move(id)),
      queue_capacity_(config.queue_capacity),
      spawned_at_(now),
      ready_at_(now + config.startup_delay),
      busy_until_(now) {
  validate(config);
  state_ = config.startup_delay == Duration::zero() ? BackendState::kReady
                                                    : BackendState::kStarting;
}

EnqueueResult BackendInstance::enqueue(const InferenceRequest& request,
                                       const ModelProfile& profile,
                                       TimePoint t_client_send,
                                       TimePoint t_gateway_in, TimePoint now,
                                       Rng& rng) {
  if (state_ == BackendState::kStopped) {
    throw std::logic_error("enqueue on stopped backend " + id_);
  }
  if (state_ != BackendState::kReady) {
    return EnqueueResult::kNotReady;
  }
  if (queue_depth(now) >= queue_capacity_) {
    return EnqueueResult::kRejectedCapacity;
  }

  Pending entry;
  entry.record.request_id = request.request_id;
  entry.record.model = request.model;
  entry.record.backend_id = id_;
  entry.record.outcome = Outcome::kOk;
  entry.record.t_client_send = t_client_send;
  entry.record.t_gateway_in = t_gateway_in;
  entry.record.t_enqueue = now;
  entry.record.t_compute_start = std::max(now, busy_until_);
  Duration service = sample_service_time(profile, request.batch_size, rng);
  entry.record.t_compute_end = entry.record.t_compute_start + service;

  busy_until_ = entry.record.t_compute_end;
  busy_accumulated_ += service;
  ++accepted_count_;
  if (!busy_intervals_.empty() &&
      busy_intervals_.back().second == entry.record.t_compute_start) {
    busy_intervals_.back().second = entry.record.t_compute_end;
  } else {
    busy_intervals_.emplace_back(entry.record.t_compute_start,
                                 entry.record.t_compute_end);
  }
  pending_.push_back(std::move(entry));
  return EnqueueResult::kAccepted;
}

std::vector<RequestRecord> BackendInstance::advance(TimePoint now) {
  if (state_ == BackendState::kStarting && now >= ready_at_) {
    state_ = BackendState::kReady;
  }
  std::vector<RequestRecord> done;
  while (!pending_.empty() &&
         pending_.front().record.t_compute_end <= now) {
    done.push_back(std::move(pending_.front().record));
    pending_.pop_front();
    ++served_count_;
  }
  if (state_ == BackendState::kDraining && pending_.empty() &&
      busy_until_ <= now) {
    state_ = BackendState::kStopped;
    stopped_at_ = std::max(*drained_at_, busy_until_);
  }
  return done;
}

void BackendInstance::drain(TimePoint now) {
  switch (state_) {
    case BackendState::kStarting:
      state_ = BackendState::kStopped;
      drained_at_ = now;
      stopped_at_ = now;
      return;
    case BackendState::kReady:
      drained_at_ = now;
      if (pending_.empty() && busy_until_ <= now) {
        state_ = BackendState::kStopped;
        stopped_at_ = now;
      } else {
        state_ = BackendState::kDraining;
      }
      return;
    case BackendState::kDraining:
    case BackendState::kStopped:
      return;
  }
}

double BackendInstance::utilization(TimePoint t0, TimePoint t1) const {
  if (t0 >= t1) {
    throw std::invalid_argument("utilization interval must satisfy t0 < t1");
  }
  return to_seconds(busy_in(t0, t1)) / to_seconds(t1 - t0);
}

Duration BackendInstance::busy_in(TimePoint t0, TimePoint t1) const {
  if (t0 >= t1) return Duration::zero();
  Duration total{};
  for (const auto& [start, end] : busy_intervals_) {
    if (end <= t0) continue;
    if (start >= t1) break;
    total += std::min(end, t1) - std::max(start, t0);
  }
  return total;
}

Duration BackendInstance::lifetime_in(TimePoint t0, TimePoint t1) const {
  TimePoint begin = std::max(t0, spawned_at_);
  TimePoint end = stopped_at_ ? std::min(t1, *stopped_at_) : t1;
  if (begin >= end) return Duration::zero();
  return end - begin;
}

std::optional<TimePoint> BackendInstance::next_event_time() const {
  std::optional<TimePoint> next;
  if (state_ == BackendState::kStarting) {
    next = ready_at_;
  }
  if (!pending_.empty()) {
    TimePoint completion = pending_.front().record.t_compute_end;
    if (!next || completion < *next) next = completion;
  }
  return next;
}

size_t BackendInstance::queue_depth(TimePoint now) const {
  auto it = std::partition_point(
      pending_.begin(), pending_.end(),
      [&](const Pending& p) { return p.record.t_compute_start < now; });
  return static_cast<size_t>(pending_.end() - it);
}

}  // namespace infersim
