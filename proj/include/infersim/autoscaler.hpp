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

#ifndef INFERSIM_AUTOSCALER_HPP_
#define INFERSIM_AUTOSCALER_HPP_

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>

#include "infersim/fleet.hpp"
#include "infersim/metrics.hpp"
#include "infersim/time.hpp"

namespace infersim {

struct AutoscalerConfig {
  Duration target_queue_latency = from_millis(100.0);
  uint32_t min_replicas = 1;
  uint32_t max_replicas = 10;
  Duration poll_interval = from_seconds(5.0);
  double tolerance = 0.10;
  Duration downscale_stabilization = from_seconds(60.0);
  Duration metric_window = from_seconds(30.0);
};

void validate(const AutoscalerConfig& config);

/// Proportional scaling law with a tolerance dead-band:
/// ceil(current * metric/target) clamped to [min, max]; unchanged while
/// |metric/target - 1| <= tolerance. Exact integer arithmetic so equal-ratio
/// boundary cases never drift.
uint32_t desired_replicas(uint32_t current, Duration metric, Duration target,
                          double tolerance, uint32_t min_replicas,
                          uint32_t max_replicas);

enum class ActionKind {
  kNone,
  kScaleUp,
  kScaleDown,
};

struct ScalingAction {
  ActionKind kind = ActionKind::kNone;
  uint32_t count = 0;
  uint32_t desired = 0;
  std::optional<Duration> metric;
};

/// Periodic reconciler: reads the pooled queue-latency metric, computes the
/// desired replica count, spawns immediately on scale-up, and drains the
/// highest-id instances on scale-down only after the desired count's maximum
/// over the stabilization window has fallen below the current count.
class Autoscaler {
 public:
  Autoscaler(AutoscalerConfig config, Fleet& fleet, MetricsRegistry& metrics);

  /// Pooled mean queue wait across Ready and Draining instances over the
  /// metric window; absent when no samples exist.
  std::optional<Duration> collect_metric(TimePoint now) const;

  ScalingAction reconcile(TimePoint now);

  const AutoscalerConfig& config() const { return config_; }
  TimePoint last_poll() const { return last_poll_; }

 private:
  AutoscalerConfig config_;
  Fleet& fleet_;
  MetricsRegistry& metrics_;
  std::deque<std::pair<TimePoint, uint32_t>> desired_history_;
  TimePoint last_poll_;
};

}  // namespace infersim

#endif  // INFERSIM_AUTOSCALER_HPP_
