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

#include "infersim/autoscaler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace infersim {

void validate(const AutoscalerConfig& config) {
  if (config.target_queue_latency <= Duration::zero()) {
    throw std::invalid_argument("autoscaler target_queue_latency must be > 0");
  }
  if (config.min_replicas < 1) {
    throw std::invalid_argument("autoscaler min_replicas must be >= 1");
  }
  if (config.min_replicas > config.max_replicas) {
    throw std::invalid_argument("autoscaler min_replicas must be <= max_replicas");
  }
  if (config.poll_interval <= Duration::zero()) {
    throw std::invalid_argument("autoscaler poll_interval must be > 0");
  }
  if (config.tolerance < 0.0 || config.tolerance >= 1.0) {
    throw std::invalid_argument("autoscaler tolerance must be in [0, 1)");
  }
  if (config.downscale_stabilization < Duration::zero()) {
    throw std::invalid_argument(
        "autoscaler downscale_stabilization must be >= 0");
  }
  if (config.metric_window <= Duration::zero()) {
    throw std::invalid_argument("autoscaler metric_window must be > 0");
  }
}

uint32_t desired_replicas(uint32_t current, Duration metric, Duration target,
                          double tolerance, uint32_t min_replicas,
                          uint32_t max_replicas) {
  if (target <= Duration::zero()) {
    throw std::invalid_argument("scaling target must be > 0");
  }
  if (current < 1) {
    throw std::invalid_argument("current replica count must be >= 1");
  }
  if (metric < Duration::zero()) {
    throw std::invalid_argument("scaling metric must be >= 0");
  }

  auto clamp = [&](uint64_t n) {
    n = std::max<uint64_t>(n, min_replicas);
    n = std::min<uint64_t>(n, max_replicas);
    return static_cast<uint32_t>(n);
  };

  long double m = static_cast<long double>(metric.count());
  long double t = static_cast<long double>(target.count());
  if (std::fabs(m - t) <= static_cast<long double>(tolerance) * t) {
    return clamp(current);
  }

  unsigned __int128 numerator =
      static_cast<unsigned __int128>(current) *
      static_cast<unsigned __int128>(metric.count());
  unsigned __int128 denominator =
      static_cast<unsigned __int128>(target.count());
  unsigned __int128 desired = (numerator + denominator - 1) / denominator;
  if (desired > max_replicas) return max_replicas;
  return clamp(static_cast<uint64_t>(desired));
}

Autoscaler::Autoscaler(AutoscalerConfig config, Fleet& fleet,
                       MetricsRegistry& metrics)
    : config_(config), fleet_(fleet), metrics_(metrics) {
  validate(config_);
}

std::optional<Duration> Autoscaler::collect_metric(TimePoint now) const {
  return metrics_.pooled_queue_average(fleet_.metric_source_ids(), now,
                                       config_.metric_window);
}

ScalingAction Autoscaler::reconcile(TimePoint now) {
  last_poll_ = now;
  std::optional<Duration> metric = collect_metric(now);
  uint32_t current = fleet_.current_replicas();

  uint32_t desired;
  if (metric) {
    desired = desired_replicas(std::max(current, 1u), *metric,
                               config_.target_queue_latency, config_.tolerance,
                               config_.min_replicas, config_.max_replicas);
  } else {
    desired = std::clamp(current, config_.min_replicas, config_.max_replicas);
  }

  desired_history_.emplace_back(now, desired);
  while (!desired_history_.empty() &&
         desired_history_.front().first <= now - config_.downscale_stabilization) {
    desired_history_.pop_front();
  }

  ScalingAction action;
  action.desired = desired;
  action.metric = metric;

  if (desired > current) {
    for (uint32_t i = current; i < desired; ++i) fleet_.spawn(now);
    action.kind = ActionKind::kScaleUp;
    action.count = desired - current;
    return action;
  }

  uint32_t stabilized = desired;
  for (const auto& [t, d] : desired_history_) {
    stabilized = std::max(stabilized, d);
  }
  if (stabilized < current) {
    uint32_t count = current - stabilized;
    fleet_.drain_highest(count, now);
    action.kind = ActionKind::kScaleDown;
    action.count = count;
    action.desired = stabilized;
    return action;
  }

  return action;
}

}  // namespace infersim
