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

#include "infersim/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string_view>

namespace infersim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "config" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError("unknown key: " + join(path, it.key()));
    }
  }
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& path,
                 const std::string& key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as_number(*it, join(path, key));
}

uint64_t as_uint(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() &&
      !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
    fail(path, "expected a non-negative integer");
  }
  return v.get<uint64_t>();
}

uint64_t uint_or(const json& obj, const std::string& path,
                 const std::string& key, uint64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as_uint(*it, join(path, key));
}

bool bool_or(const json& obj, const std::string& path, const std::string& key,
             bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) fail(join(path, key), "expected a boolean");
  return it->get<bool>();
}

std::string string_or(const json& obj, const std::string& path,
                      const std::string& key, const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) fail(join(path, key), "expected a string");
  return it->get<std::string>();
}

Duration millis_or(const json& obj, const std::string& path,
                   const std::string& key, Duration fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return from_millis(as_number(*it, join(path, key)));
}

Duration seconds_or(const json& obj, const std::string& path,
                    const std::string& key, Duration fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return from_seconds(as_number(*it, join(path, key)));
}

ModelProfile parse_model(const json& obj, const std::string& path) {
  check_keys(obj, path, {"name", "base_time_ms", "per_item_time_ms", "jitter_sigma"});
  ModelProfile profile;
  profile.name = string_or(obj, path, "name", "");
  if (profile.name.empty()) fail(join(path, "name"), "model name is required");
  profile.base_time = millis_or(obj, path, "base_time_ms", Duration::zero());
  profile.per_item_time = millis_or(obj, path, "per_item_time_ms", Duration::zero());
  profile.jitter_sigma = number_or(obj, path, "jitter_sigma", 0.0);
  return profile;
}

GatewayConfig parse_gateway(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"auth_enabled", "valid_tokens", "max_concurrent_connections",
              "external_metric_limit", "listen_address"});
  GatewayConfig config;
  config.auth_enabled = bool_or(obj, path, "auth_enabled", false);
  if (auto it = obj.find("valid_tokens"); it != obj.end()) {
    if (!it->is_array()) fail(join(path, "valid_tokens"), "expected an array");
    for (const json& token : *it) {
      if (!token.is_string()) {
        fail(join(path, "valid_tokens"), "expected string entries");
      }
      config.valid_tokens.push_back(token.get<std::string>());
    }
  }
  config.max_concurrent_connections = static_cast<uint32_t>(
      uint_or(obj, path, "max_concurrent_connections", 64));
  if (auto it = obj.find("external_metric_limit");
      it != obj.end() && !it->is_null()) {
    const std::string sub = join(path, "external_metric_limit");
    check_keys(*it, sub, {"metric", "threshold_ms"});
    ExternalMetricLimit limit;
    limit.metric = string_or(*it, sub, "metric", "");
    if (limit.metric != "avg_queue_latency_ms") {
      fail(join(sub, "metric"), "unsupported metric (use avg_queue_latency_ms)");
    }
    auto threshold = it->find("threshold_ms");
    if (threshold == it->end()) {
      fail(join(sub, "threshold_ms"), "threshold is required");
    }
    limit.threshold = as_number(*threshold, join(sub, "threshold_ms"));
    config.external_metric_limit = limit;
  }
  config.listen_address = string_or(obj, path, "listen_address", "127.0.0.1:0");
  return config;
}

BackendConfig parse_backend(const json& obj, const std::string& path) {
  check_keys(obj, path, {"queue_capacity", "startup_delay_s"});
  BackendConfig config;
  config.queue_capacity =
      static_cast<size_t>(uint_or(obj, path, "queue_capacity", 1000));
  config.startup_delay =
      seconds_or(obj, path, "startup_delay_s", from_seconds(10.0));
  return config;
}

AutoscalerConfig parse_autoscaler(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"target_queue_latency_ms", "min_replicas", "max_replicas",
              "poll_interval_s", "tolerance", "downscale_stabilization_s",
              "metric_window_s"});
  AutoscalerConfig config;
  config.target_queue_latency =
      millis_or(obj, path, "target_queue_latency_ms", from_millis(100.0));
  config.min_replicas =
      static_cast<uint32_t>(uint_or(obj, path, "min_replicas", 1));
  config.max_replicas =
      static_cast<uint32_t>(uint_or(obj, path, "max_replicas", 10));
  config.poll_interval =
      seconds_or(obj, path, "poll_interval_s", from_seconds(5.0));
  config.tolerance = number_or(obj, path, "tolerance", 0.10);
  config.downscale_stabilization =
      seconds_or(obj, path, "downscale_stabilization_s", from_seconds(60.0));
  config.metric_window =
      seconds_or(obj, path, "metric_window_s", from_seconds(30.0));
  return config;
}

PhaseSchedule parse_schedule(const json& obj, const std::string& path) {
  check_keys(obj, path, {"phases", "client"});
  PhaseSchedule schedule;
  auto phases = obj.find("phases");
  if (phases == obj.end() || !phases->is_array()) {
    fail(join(path, "phases"), "expected an array of phases");
  }
  size_t index = 0;
  for (const json& entry : *phases) {
    const std::string sub = join(path, "phases[" + std::to_string(index++) + "]");
    check_keys(entry, sub, {"duration_s", "clients"});
    Phase phase;
    phase.duration = seconds_or(entry, sub, "duration_s", Duration::zero());
    phase.client_count = static_cast<uint32_t>(uint_or(entry, sub, "clients", 0));
    schedule.phases.push_back(phase);
  }
  auto client = obj.find("client");
  if (client == obj.end()) fail(join(path, "client"), "client block is required");
  const std::string sub = join(path, "client");
  check_keys(*client, sub,
             {"model", "batch_size", "think_time_ms", "token", "payload_size"});
  schedule.client.model = string_or(*client, sub, "model", "");
  schedule.client.batch_size =
      static_cast<uint32_t>(uint_or(*client, sub, "batch_size", 1));
  schedule.client.think_time =
      millis_or(*client, sub, "think_time_ms", Duration::zero());
  schedule.client.token = string_or(*client, sub, "token", "");
  schedule.client.payload_size = uint_or(*client, sub, "payload_size", 0);
  return schedule;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "",
             {"mode", "seed", "network_delay_ms", "time_scale",
              "metrics_address", "models", "gateway", "backend", "autoscaler",
              "static_replicas", "schedule"});
  ExperimentConfig config;

  std::string mode = string_or(j, "", "mode", "virtual");
  if (mode == "virtual") {
    config.mode = RunMode::kVirtual;
  } else if (mode == "wallclock") {
    config.mode = RunMode::kWallClock;
  } else {
    fail("mode", "expected \"virtual\" or \"wallclock\"");
  }

  config.seed = uint_or(j, "", "seed", 1);
  config.network_delay = millis_or(j, "", "network_delay_ms", Duration::zero());
  config.time_scale = number_or(j, "", "time_scale", 1.0);
  config.metrics_address = string_or(j, "", "metrics_address", "");

  auto models = j.find("models");
  if (models == j.end() || !models->is_array()) {
    fail("models", "expected an array of model profiles");
  }
  size_t index = 0;
  for (const json& entry : *models) {
    config.models.push_back(
        parse_model(entry, "models[" + std::to_string(index++) + "]"));
  }

  if (auto it = j.find("gateway"); it != j.end()) {
    config.gateway = parse_gateway(*it, "gateway");
  }
  if (auto it = j.find("backend"); it != j.end()) {
    config.backend = parse_backend(*it, "backend");
  }
  if (auto it = j.find("autoscaler"); it != j.end() && !it->is_null()) {
    config.autoscaler = parse_autoscaler(*it, "autoscaler");
  }
  if (auto it = j.find("static_replicas"); it != j.end() && !it->is_null()) {
    config.static_replicas =
        static_cast<uint32_t>(as_uint(*it, "static_replicas"));
  }

  auto schedule = j.find("schedule");
  if (schedule == j.end()) fail("schedule", "schedule block is required");
  config.schedule = parse_schedule(*schedule, "schedule");

  validate(config);
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void validate(const ExperimentConfig& config) {
  if (config.models.empty()) {
    throw ConfigError("models: at least one model profile is required");
  }
  std::set<std::string> names;
  for (const ModelProfile& model : config.models) {
    try {
      validate(model);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("models: ") + e.what());
    }
    if (!names.insert(model.name).second) {
      throw ConfigError("models: duplicate model name " + model.name);
    }
  }

  try {
    validate(config.gateway);
    validate(config.backend);
    if (config.autoscaler) validate(*config.autoscaler);
    validate(config.schedule);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (config.autoscaler.has_value() == config.static_replicas.has_value()) {
    throw ConfigError(
        "exactly one of autoscaler / static_replicas must be set");
  }
  if (config.static_replicas && *config.static_replicas < 1) {
    throw ConfigError("static_replicas: must be >= 1");
  }
  if (config.network_delay < Duration::zero()) {
    throw ConfigError("network_delay_ms: must be >= 0");
  }
  if (!(config.time_scale > 0.0)) {
    throw ConfigError("time_scale: must be > 0");
  }
  if (!names.count(config.schedule.client.model)) {
    throw ConfigError("schedule.client.model: unknown model " +
                      config.schedule.client.model);
  }
}

const ModelProfile& find_model(const ExperimentConfig& config,
                               const std::string& name) {
  for (const ModelProfile& model : config.models) {
    if (model.name == name) return model;
  }
  throw std::invalid_argument("unknown model: " + name);
}

uint32_t initial_replicas(const ExperimentConfig& config) {
  return config.static_replicas ? *config.static_replicas
                                : config.autoscaler->min_replicas;
}

}  // namespace infersim
