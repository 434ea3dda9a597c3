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

#include "infersim/time.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <utility>

namespace infersim {

void VirtualClock::advance_to(TimePoint t) {
  if (t < now_) {
    throw std::logic_error("virtual clock moved backwards");
  }
  now_ = t;
}

ScaledWallClock::ScaledWallClock(double time_scale)
    : start_(std::chrono::steady_clock::now()), scale_(time_scale) {
  if (!(time_scale > 0.0)) {
    throw std::invalid_argument("time_scale must be positive");
  }
}

TimePoint ScaledWallClock::now() {
  auto real = std::chrono::steady_clock::now() - start_;
  double virtual_ns = static_cast<double>(real.count()) * scale_;
  return TimePoint{Duration{static_cast<int64_t>(virtual_ns)}};
}

std::chrono::steady_clock::time_point ScaledWallClock::real_deadline(TimePoint t) const {
  double real_ns = static_cast<double>(t.time_since_epoch().count()) / scale_;
  return start_ + std::chrono::nanoseconds{static_cast<int64_t>(std::llround(real_ns))};
}

void ScaledWallClock::sleep_until(TimePoint t) const {
  std::this_thread::sleep_until(real_deadline(t));
}

void ScaledWallClock::sleep_for(Duration d) const {
  double real_ns = static_cast<double>(d.count()) / scale_;
  std::this_thread::sleep_for(std::chrono::nanoseconds{static_cast<int64_t>(std::llround(real_ns))});
}

void EventQueue::at(TimePoint t, Handler h) {
  heap_.push_back(Event{t, next_seq_++, std::move(h)});
  std::push_heap(heap_.begin(), heap_.end(), After{});
}

bool EventQueue::step(VirtualClock& clock) {
  if (heap_.empty()) {
    return false;
  }
  std::pop_heap(heap_.begin(), heap_.end(), After{});
  Event ev = std::move(heap_.back());
  heap_.pop_back();
  clock.advance_to(ev.t);
  ev.fn();
  return true;
}

void EventQueue::run(VirtualClock& clock) {
  while (step(clock)) {
  }
}

}  // namespace infersim
