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

#ifndef INFERSIM_CONFIG_HPP_
#define INFERSIM_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "infersim/autoscaler.hpp"
#include "infersim/backend.hpp"
#include "infersim/gateway.hpp"
#include "infersim/loadgen.hpp"
#include "infersim/model_profile.hpp"
#include "infersim/time.hpp"

namespace infersim {

/// Raised for malformed configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode {
  kVirtual,
  kWallClock,
};

struct ExperimentConfig {
  RunMode mode = RunMode::kVirtual;
  uint64_t seed = 1;
  Duration network_delay{};
  /// Wall-clock mode: virtual seconds that elapse per real second.
  double time_scale = 1.0;
  /// Wall-clock mode: metrics endpoint bind address; empty disables it.
  std::string metrics_address;
  std::vector<ModelProfile> models;
  GatewayConfig gateway;
  BackendConfig backend;
  std::optional<AutoscalerConfig> autoscaler;
  std::optional<uint32_t> static_replicas;
  PhaseSchedule schedule;
};

/// Strict parse: every key must be known (silent typos in scaling knobs would
/// invalidate experiments) and every value well-typed.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

void validate(const ExperimentConfig& config);

const ModelProfile& find_model(const ExperimentConfig& config,
                               const std::string& name);

/// Replica count present at run start.
uint32_t initial_replicas(const ExperimentConfig& config);

}  // namespace infersim

#endif  // INFERSIM_CONFIG_HPP_
