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

#ifndef INFERSIM_RNG_HPP_
#define INFERSIM_RNG_HPP_

#include <cstdint>
#include <random>

#include "infersim/time.hpp"

namespace infersim {

/// Seeded generator with hand-rolled transforms. mt19937_64 output is pinned
/// by the standard and the transforms below avoid the library-defined
/// distribution internals, so a seed reproduces the same draw sequence on any
/// platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal();

  /// Multiplicative lognormal factor exp(sigma * Z); median 1.
  double lognormal_factor(double sigma);

  /// Exponentially distributed interarrival gap for the given rate.
  Duration exponential(double rate_per_sec);

  uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace infersim

#endif  // INFERSIM_RNG_HPP_
