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

#ifndef INFERSIM_GATEWAY_HPP_
#define INFERSIM_GATEWAY_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infersim/fleet.hpp"
#include "infersim/metrics.hpp"
#include "infersim/model_profile.hpp"
#include "infersim/request.hpp"
#include "infersim/rng.hpp"
#include "infersim/time.hpp"

namespace infersim {

struct ExternalMetricLimit {
  std::string metric;
  double threshold = 0.0;
};

struct GatewayConfig {
  bool auth_enabled = false;
  std::vector<std::string> valid_tokens;
  uint32_t max_concurrent_connections = 64;
  std::optional<ExternalMetricLimit> external_metric_limit;
  std::string listen_address = "127.0.0.1:0";
};

void validate(const GatewayConfig& config);

/// Constant-time membership test: the comparison cost does not depend on
/// where a candidate token diverges from a stored one.
bool authenticate(std::string_view token, const GatewayConfig& config);

/// Admission control: denies when the connection limit is reached or the
/// external metric (when wired and present) exceeds its threshold.
bool admit(uint64_t active_connections, const GatewayConfig& config,
           std::optional<double> external_metric);

/// Cursor-based round robin over the fleet's id order, skipping every
/// non-Ready instance. Keeping the cursor as the last-chosen id makes
/// selection stable under replica churn.
class RoundRobin {
 public:
  BackendInstance* select(Fleet& fleet);

 private:
  std::string cursor_;
};

struct RouteResult {
  Outcome outcome = Outcome::kOk;
  std::string backend_id;
  /// Present for every non-ok outcome; ok records surface later via the
  /// backend once compute finishes.
  std::optional<RequestRecord> rejection;
};

/// The single client-facing endpoint: authenticate, admit, balance, enqueue.
class Gateway {
 public:
  using ExternalMetricSource = std::function<std::optional<double>()>;

  Gateway(GatewayConfig config, Fleet& fleet,
          std::map<std::string, ModelProfile> models,
          MetricsRegistry& metrics);

  /// Stamps t_gateway_in = now and runs the full admission pipeline. An
  /// accepted request occupies one connection slot until
  /// on_response_delivered() is called for it.
  RouteResult route(const InferenceRequest& request, TimePoint t_client_send,
                    TimePoint now, Rng& rng);

  void on_response_delivered();

  void set_external_metric_source(ExternalMetricSource source);

  uint64_t active_connections() const { return active_; }
  uint64_t peak_active() const { return peak_active_; }

  const GatewayConfig& config() const { return config_; }
  const std::map<std::string, ModelProfile>& models() const { return models_; }

 private:
  GatewayConfig config_;
  Fleet& fleet_;
  std::map<std::string, ModelProfile> models_;
  MetricsRegistry& metrics_;
  RoundRobin round_robin_;
  ExternalMetricSource external_metric_source_;
  uint64_t active_ = 0;
  uint64_t peak_active_ = 0;
};

}  // namespace infersim

#endif  // INFERSIM_GATEWAY_HPP_
