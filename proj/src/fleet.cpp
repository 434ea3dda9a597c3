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

#include "infersim/fleet.hpp"

#include <algorithm>
#include <cstdio>
#include <utility>

namespace infersim {

Fleet::Fleet(BackendConfig backend_config)
    : backend_config_(backend_config) {
  validate(backend_config_);
}

BackendInstance& Fleet::spawn_with_delay(TimePoint now, Duration delay) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "b%04u", next_id_++);
  std::string id(buf);
  BackendConfig config = backend_config_;
  config.startup_delay = delay;
  auto [it, inserted] =
      instances_.emplace(id, std::make_unique<BackendInstance>(id, config, now));
  return *it->second;
}

BackendInstance& Fleet::spawn(TimePoint now) {
  return spawn_with_delay(now, backend_config_.startup_delay);
}

BackendInstance& Fleet::spawn_ready(TimePoint now) {
  return spawn_with_delay(now, Duration::zero());
}

std::vector<std::string> Fleet::drain_highest(uint32_t n, TimePoint now) {
  std::vector<std::string> drained;
  for (auto it = instances_.rbegin();
       it != instances_.rend() && drained.size() < n; ++it) {
    BackendState state = it->second->state();
    if (state == BackendState::kReady || state == BackendState::kStarting) {
      it->second->drain(now);
      drained.push_back(it->first);
    }
  }
  return drained;
}

std::vector<RequestRecord> Fleet::advance_all(TimePoint now) {
  std::vector<RequestRecord> done;
  for (auto& [id, instance] : instances_) {
    std::vector<RequestRecord> records = instance->advance(now);
    done.insert(done.end(), std::make_move_iterator(records.begin()),
                std::make_move_iterator(records.end()));
  }
  return done;
}

BackendInstance* Fleet::find(const std::string& id) {
  auto it = instances_.find(id);
  return it == instances_.end() ? nullptr : it->second.get();
}

const BackendInstance* Fleet::find(const std::string& id) const {
  auto it = instances_.find(id);
  return it == instances_.end() ? nullptr : it->second.get();
}

std::vector<const BackendInstance*> Fleet::all_instances() const {
  std::vector<const BackendInstance*> out;
  out.reserve(instances_.size());
  for (const auto& [id, instance] : instances_) out.push_back(instance.get());
  return out;
}

std::vector<BackendInstance*> Fleet::all_instances() {
  std::vector<BackendInstance*> out;
  out.reserve(instances_.size());
  for (auto& [id, instance] : instances_) out.push_back(instance.get());
  return out;
}

std::vector<std::string> Fleet::all_ids() const {
  std::vector<std::string> out;
  out.reserve(instances_.size());
  for (const auto& [id, instance] : instances_) out.push_back(id);
  return out;
}

std::vector<std::string> Fleet::metric_source_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, instance] : instances_) {
    BackendState state = instance->state();
    if (state == BackendState::kReady || state == BackendState::kDraining) {
      out.push_back(id);
    }
  }
  return out;
}

uint32_t Fleet::ready_count() const {
  uint32_t n = 0;
  for (const auto& [id, instance] : instances_) {
    if (instance->state() == BackendState::kReady) ++n;
  }
  return n;
}

uint32_t Fleet::starting_count() const {
  uint32_t n = 0;
  for (const auto& [id, instance] : instances_) {
    if (instance->state() == BackendState::kStarting) ++n;
  }
  return n;
}

uint32_t Fleet::draining_count() const {
  uint32_t n = 0;
  for (const auto& [id, instance] : instances_) {
    if (instance->state() == BackendState::kDraining) ++n;
  }
  return n;
}

uint32_t Fleet::live_count() const {
  uint32_t n = 0;
  for (const auto& [id, instance] : instances_) {
    if (instance->state() != BackendState::kStopped) ++n;
  }
  return n;
}

uint32_t Fleet::current_replicas() const {
  return ready_count() + starting_count();
}

std::optional<TimePoint> Fleet::next_event_time() const {
  std::optional<TimePoint> next;
  for (const auto& [id, instance] : instances_) {
    std::optional<TimePoint> t = instance->next_event_time();
    if (t && (!next || *t < *next)) next = t;
  }
  return next;
}

Duration Fleet::total_busy_in(TimePoint t0, TimePoint t1) const {
  Duration total{};
  for (const auto& [id, instance] : instances_) {
    total += instance->busy_in(t0, t1);
  }
  return total;
}

Duration Fleet::total_lifetime_in(TimePoint t0, TimePoint t1) const {
  Duration total{};
  for (const auto& [id, instance] : instances_) {
    total += instance->lifetime_in(t0, t1);
  }
  return total;
}

uint64_t Fleet::total_accepted() const {
  uint64_t n = 0;
  for (const auto& [id, instance] : instances_) n += instance->accepted_count();
  return n;
}

uint64_t Fleet::total_served() const {
  uint64_t n = 0;
  for (const auto& [id, instance] : instances_) n += instance->served_count();
  return n;
}

}  // namespace infersim
