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

#ifndef INFERSIM_WALLCLOCK_RUNTIME_HPP_
#define INFERSIM_WALLCLOCK_RUNTIME_HPP_

#include "infersim/config.hpp"
#include "infersim/experiment.hpp"

namespace infersim {

/// Concurrent execution: a TCP gateway endpoint speaking the wire protocol,
/// in-process closed-loop clients, an engine thread driving the fleet, a
/// reconciler, a per-virtual-second sampler, and an optional HTTP metrics
/// endpoint. Virtual time is compressed by config.time_scale so integration
/// runs stay fast. Not deterministic; the virtual mode is the replayable one.
RunResult run_wallclock(const ExperimentConfig& config);

}  // namespace infersim

#endif  // INFERSIM_WALLCLOCK_RUNTIME_HPP_
