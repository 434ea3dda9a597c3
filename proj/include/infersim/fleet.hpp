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

#ifndef INFERSIM_FLEET_HPP_
#define INFERSIM_FLEET_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "infersim/backend.hpp"
#include "infersim/time.hpp"

namespace infersim {

/// Owns every backend instance of a run, including stopped ones (they keep
/// contributing to utilization accounting). Ids are "b" plus a zero-padded
/// sequence number, so lexicographic order is creation order.
class Fleet {
 public:
  explicit Fleet(BackendConfig backend_config);

  /// New instance honoring the configured startup delay.
  BackendInstance& spawn(TimePoint now);

  /// New instance that skips the startup delay; used for replicas that are
  /// already deployed when a run begins.
  BackendInstance& spawn_ready(TimePoint now);

  /// Drains the n highest-id instances among Ready and Starting ones.
  /// Returns the ids drained (fewer than n when not enough candidates).
  std::vector<std::string> drain_highest(uint32_t n, TimePoint now);

  /// Advances every instance, concatenating completions in id order.
  std::vector<RequestRecord> advance_all(TimePoint now);

  BackendInstance* find(const std::string& id);
  const BackendInstance* find(const std::string& id) const;

  /// All instances in id order, including stopped ones.
  std::vector<const BackendInstance*> all_instances() const;
  std::vector<BackendInstance*> all_instances();

  std::vector<std::string> all_ids() const;

  /// Ids of instances whose queue series feed the scaling metric.
  std::vector<std::string> metric_source_ids() const;

  uint32_t ready_count() const;
  uint32_t starting_count() const;
  uint32_t draining_count() const;
  uint32_t live_count() const;

  /// Ready + Starting: replicas the autoscaler considers provisioned.
  uint32_t current_replicas() const;

  std::optional<TimePoint> next_event_time() const;

  Duration total_busy_in(TimePoint t0, TimePoint t1) const;
  Duration total_lifetime_in(TimePoint t0, TimePoint t1) const;
  uint64_t total_accepted() const;
  uint64_t total_served() const;

  const BackendConfig& backend_config() const { return backend_config_; }

 private:
  BackendInstance& spawn_with_delay(TimePoint now, Duration delay);

  BackendConfig backend_config_;
  uint32_t next_id_ = 0;
  std::map<std::string, std::unique_ptr<BackendInstance>> instances_;
};

}  // namespace infersim

#endif  // INFERSIM_FLEET_HPP_
