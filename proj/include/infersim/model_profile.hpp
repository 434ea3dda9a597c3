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

#ifndef INFERSIM_MODEL_PROFILE_HPP_
#define INFERSIM_MODEL_PROFILE_HPP_

#include <cstdint>
#include <string>

#include "infersim/rng.hpp"
#include "infersim/time.hpp"

namespace infersim {

/// Synthetic per-model GPU service-time model. A request with batch size b
/// occupies the execution unit for base_time + b * per_item_time, optionally
/// scaled by multiplicative lognormal noise. Jitter is median-preserving and
/// always positive; sigma 0 disables it.
struct ModelProfile {
  std::string name;
  Duration base_time{};
  Duration per_item_time{};
  double jitter_sigma = 0.0;

  bool operator==(const ModelProfile&) const = default;
};

/// Throws std::invalid_argument when fields are out of range.
void validate(const ModelProfile& profile);

/// Service time for one request. Deterministic given the rng seed; with
/// jitter disabled the rng is not consumed.
Duration sample_service_time(const ModelProfile& profile, uint32_t batch_size, Rng& rng);

}  // namespace infersim

#endif  // INFERSIM_MODEL_PROFILE_HPP_
