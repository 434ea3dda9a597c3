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

#include "infersim/gateway.hpp"

#include <stdexcept>
#include <utility>

namespace infersim {

void validate(const GatewayConfig& config) {
  if (config.auth_enabled && config.valid_tokens.empty()) {
    throw std::invalid_argument(
        "gateway auth_enabled requires at least one valid token");
  }
  if (config.max_concurrent_connections == 0) {
    throw std::invalid_argument(
        "gateway max_concurrent_connections must be >= 1");
  }
  if (config.external_metric_limit &&
      config.external_metric_limit->metric.empty()) {
    throw std::invalid_argument(
        "gateway external_metric_limit requires a metric name");
  }
}

namespace {

bool constant_time_equal(std::string_view a, std::string_view b) {
  size_t limit = std::max(a.size(), b.size());
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (size_t i = 0; i < limit; ++i) {
    unsigned char ca = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    unsigned char cb = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff = static_cast<unsigned char>(diff | (ca ^ cb));
  }
  return diff == 0;
}

}  // namespace

bool authenticate(std::string_view token, const GatewayConfig& config) {
  if (!config.auth_enabled) return true;
  bool match = false;
  for (const std::string& valid : config.valid_tokens) {
    match |= constant_time_equal(token, valid);
  }
  return match;
}

bool admit(uint64_t active_connections, const GatewayConfig& config,
           std::optional<double> external_metric) {
  if (active_connections >= config.max_concurrent_connections) return false;
  if (config.external_metric_limit && external_metric &&
      *external_metric > config.external_metric_limit->threshold) {
    return false;
  }
  return true;
}

BackendInstance* RoundRobin::select(Fleet& fleet) {
  BackendInstance* first_ready = nullptr;
  for (BackendInstance* instance : fleet.all_instances()) {
    if (instance->state() != BackendState::kReady) continue;
    if (!first_ready) first_ready = instance;
    if (instance->id() > cursor_) {
      cursor_ = instance->id();
      return instance;
    }
  }
  if (first_ready) {
    cursor_ = first_ready->id();
    return first_ready;
  }
  return nullptr;
}

Gateway::Gateway(GatewayConfig config, Fleet& fleet,
                 std::map<std::string, ModelProfile> models,
                 MetricsRegistry& metrics)
    : config_(std::move(config)),
      fleet_(fleet),
      models_(std::move(models)),
      metrics_(metrics) {
  validate(config_);
}

void Gateway::set_external_metric_source(ExternalMetricSource source) {
  external_metric_source_ = std::move(source);
}

RouteResult Gateway::route(const InferenceRequest& request,
                           TimePoint t_client_send, TimePoint now, Rng& rng) {
  RouteResult result;
  auto reject = [&](Outcome outcome) {
    RequestRecord record;
    record.request_id = request.request_id;
    record.model = request.model;
    record.outcome = outcome;
    record.t_client_send = t_client_send;
    record.t_gateway_in = now;
    result.outcome = outcome;
    result.rejection = std::move(record);
    return result;
  };

  if (!authenticate(request.token, config_)) {
    return reject(Outcome::kRejectedAuth);
  }

  std::optional<double> external;
  if (config_.external_metric_limit && external_metric_source_) {
    external = external_metric_source_();
  }
  if (!admit(active_, config_, external)) {
    return reject(Outcome::kRejectedRate);
  }

  auto model_it = models_.find(request.model);
  if (model_it == models_.end()) {
    return reject(Outcome::kNoBackend);
  }

  BackendInstance* backend = round_robin_.select(fleet_);
  if (!backend) {
    return reject(Outcome::kNoBackend);
  }

  EnqueueResult enqueued = backend->enqueue(request, model_it->second,
                                            t_client_send, now, now, rng);
  if (enqueued == EnqueueResult::kRejectedCapacity) {
    reject(Outcome::kRejectedCapacity);
    result.rejection->backend_id = backend->id();
    return result;
  }
  if (enqueued == EnqueueResult::kNotReady) {
    reject(Outcome::kNoBackend);
    result.rejection->backend_id = backend->id();
    return result;
  }

  ++active_;
  peak_active_ = std::max(peak_active_, active_);
  result.outcome = Outcome::kOk;
  result.backend_id = backend->id();
  return result;
}

void Gateway::on_response_delivered() {
  if (active_ == 0) {
    throw std::logic_error("response delivered with no active connection");
  }
  --active_;
}

}  // namespace infersim
