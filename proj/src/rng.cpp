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

#include "infersim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace infersim {

double Rng::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::lognormal_factor(double sigma) {
  if (sigma < 0.0) {
    throw std::invalid_argument("lognormal sigma must be >= 0");
  }
  if (sigma == 0.0) {
    return 1.0;
  }
  return std::exp(sigma * normal());
}

Duration Rng::exponential(double rate_per_sec) {
  if (!(rate_per_sec > 0.0)) {
    throw std::invalid_argument("exponential rate must be positive");
  }
  double gap_s = -std::log(1.0 - uniform()) / rate_per_sec;
  return from_seconds(gap_s);
}

}  // namespace infersim
