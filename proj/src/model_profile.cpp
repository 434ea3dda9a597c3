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

#include "infersim/model_profile.hpp"

#include <cmath>
#include <stdexcept>

namespace infersim {

void validate(const ModelProfile& profile) {
  if (profile.name.empty()) {
    throw std::invalid_argument("model profile needs a name");
  }
  if (profile.base_time < Duration::zero() || profile.per_item_time < Duration::zero()) {
    throw std::invalid_argument("model '" + profile.name + "': times must be >= 0");
  }
  if (profile.jitter_sigma < 0.0) {
    throw std::invalid_argument("model '" + profile.name + "': jitter_sigma must be >= 0");
  }
}

Duration sample_service_time(const ModelProfile& profile, uint32_t batch_size, Rng& rng) {
  if (batch_size == 0) {
    throw std::invalid_argument("batch_size must be >= 1");
  }
  int64_t ns = profile.base_time.count() +
               static_cast<int64_t>(batch_size) * profile.per_item_time.count();
  if (profile.jitter_sigma > 0.0) {
    double scaled = static_cast<double>(ns) * rng.lognormal_factor(profile.jitter_sigma);
    ns = static_cast<int64_t>(std::llround(scaled));
  }
  return Duration{ns < 0 ? 0 : ns};
}

}  // namespace infersim
