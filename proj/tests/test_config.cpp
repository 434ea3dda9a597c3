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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "infersim/config.hpp"

using namespace infersim;

namespace {

// Smallest valid config: one model, a schedule, and a static fleet.
const char* kMinimal = R"({
  "models": [{"name": "m", "base_time_ms": 40, "per_item_time_ms": 1}],
  "static_replicas": 1,
  "schedule": {
    "phases": [{"duration_s": 10, "clients": 1}],
    "client": {"model": "m", "batch_size": 10, "think_time_ms": 50}
  }
})";

std::string with(const std::string& needle, const std::string& replacement) {
  std::string text = kMinimal;
  size_t pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, needle.size(), replacement);
  return text;
}

}  // namespace

TEST_CASE("minimal config parses with documented defaults") {
  ExperimentConfig config = parse_config_text(kMinimal);
  CHECK(config.mode == RunMode::kVirtual);
  CHECK(config.seed == 1);
  CHECK(config.network_delay == Duration::zero());
  CHECK(config.time_scale == 1.0);
  CHECK(config.metrics_address.empty());
  REQUIRE(config.models.size() == 1);
  CHECK(config.models[0].name == "m");
  CHECK(to_millis(config.models[0].base_time) == doctest::Approx(40.0));
  CHECK(config.models[0].jitter_sigma == 0.0);
  CHECK_FALSE(config.gateway.auth_enabled);
  CHECK(config.gateway.max_concurrent_connections == 64);
  CHECK(config.backend.queue_capacity == 1000);
  CHECK(to_seconds(config.backend.startup_delay) == doctest::Approx(10.0));
  CHECK_FALSE(config.autoscaler.has_value());
  REQUIRE(config.static_replicas.has_value());
  CHECK(*config.static_replicas == 1);
  CHECK(initial_replicas(config) == 1);
}

TEST_CASE("full config parses every section") {
  const char* text = R"({
    "mode": "wallclock",
    "seed": 99,
    "network_delay_ms": 2.5,
    "time_scale": 20,
    "metrics_address": "127.0.0.1:9100",
    "models": [
      {"name": "m", "base_time_ms": 40, "per_item_time_ms": 1, "jitter_sigma": 0.25}
    ],
    "gateway": {
      "auth_enabled": true,
      "valid_tokens": ["a", "b"],
      "max_concurrent_connections": 8,
      "external_metric_limit": {"metric": "avg_queue_latency_ms", "threshold_ms": 250},
      "listen_address": "127.0.0.1:4000"
    },
    "backend": {"queue_capacity": 64, "startup_delay_s": 2},
    "autoscaler": {
      "target_queue_latency_ms": 100,
      "min_replicas": 1,
      "max_replicas": 10,
      "poll_interval_s": 5,
      "tolerance": 0.1,
      "downscale_stabilization_s": 60,
      "metric_window_s": 30
    },
    "schedule": {
      "phases": [{"duration_s": 300, "clients": 1}, {"duration_s": 300, "clients": 10}],
      "client": {"model": "m", "batch_size": 10, "think_time_ms": 50,
                 "token": "a", "payload_size": 1024}
    }
  })";
  ExperimentConfig config = parse_config_text(text);
  CHECK(config.mode == RunMode::kWallClock);
  CHECK(config.seed == 99);
  CHECK(to_millis(config.network_delay) == doctest::Approx(2.5));
  CHECK(config.time_scale == 20.0);
  CHECK(config.gateway.auth_enabled);
  CHECK(config.gateway.valid_tokens.size() == 2);
  REQUIRE(config.gateway.external_metric_limit.has_value());
  CHECK(config.gateway.external_metric_limit->threshold == 250.0);
  CHECK(config.gateway.listen_address == "127.0.0.1:4000");
  CHECK(config.backend.queue_capacity == 64);
  REQUIRE(config.autoscaler.has_value());
  CHECK(config.autoscaler->min_replicas == 1);
  CHECK(config.autoscaler->max_replicas == 10);
  CHECK(to_seconds(config.autoscaler->downscale_stabilization) ==
        doctest::Approx(60.0));
  CHECK(config.schedule.phases.size() == 2);
  CHECK(config.schedule.client.payload_size == 1024);
  CHECK(initial_replicas(config) == 1);
}

TEST_CASE("unknown keys fail with their full path") {
  CHECK_THROWS_WITH_AS(
      parse_config_text(with("\"static_replicas\": 1",
                             "\"static_replicas\": 1, \"extra\": 1")),
      "unknown key: extra", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(with("\"batch_size\": 10",
                             "\"batch_size\": 10, \"typo\": 2")),
      "unknown key: schedule.client.typo", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(with("\"base_time_ms\": 40",
                             "\"base_time_ms\": 40, \"bad\": 1")),
      "unknown key: models[0].bad", ConfigError);
}

TEST_CASE("type errors name the offending key") {
  CHECK_THROWS_AS(parse_config_text(with("\"duration_s\": 10",
                                         "\"duration_s\": \"ten\"")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(with("\"static_replicas\": 1",
                                         "\"static_replicas\": -2")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[1,2,3]"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{nope"), ConfigError);
}

TEST_CASE("exactly one of autoscaler and static_replicas") {
  CHECK_THROWS_WITH_AS(
      parse_config_text(with("\"static_replicas\": 1,", "")),
      "exactly one of autoscaler / static_replicas must be set", ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(with("\"static_replicas\": 1",
                             "\"static_replicas\": 1, \"autoscaler\": {}")),
      ConfigError);
  CHECK_NOTHROW(
      parse_config_text(with("\"static_replicas\": 1", "\"autoscaler\": {}")));
}

TEST_CASE("semantic validation failures") {
  CHECK_THROWS_AS(
      parse_config_text(with(
          "\"models\": [{\"name\": \"m\", \"base_time_ms\": 40, \"per_item_time_ms\": 1}]",
          "\"models\": []")),
      ConfigError);
  // Unknown client model.
  CHECK_THROWS_AS(
      parse_config_text(with("\"client\": {\"model\": \"m\"",
                             "\"client\": {\"model\": \"ghost\"")),
      ConfigError);
  // Duplicate model names.
  CHECK_THROWS_AS(
      parse_config_text(with(
          "\"models\": [{\"name\": \"m\", \"base_time_ms\": 40, \"per_item_time_ms\": 1}]",
          "\"models\": [{\"name\": \"m\", \"base_time_ms\": 40}, {\"name\": \"m\", \"base_time_ms\": 1}]")),
      ConfigError);
  // A zero-duration phase.
  CHECK_THROWS_AS(
      parse_config_text(with("\"duration_s\": 10", "\"duration_s\": 0")),
      ConfigError);
  // Negative network delay and non-positive time scale.
  CHECK_THROWS_AS(
      parse_config_text(with("\"static_replicas\": 1",
                             "\"static_replicas\": 1, \"network_delay_ms\": -1")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(with("\"static_replicas\": 1",
                             "\"static_replicas\": 1, \"time_scale\": 0")),
      ConfigError);
  // External metric limits only support the documented metric.
  CHECK_THROWS_AS(
      parse_config_text(with(
          "\"static_replicas\": 1",
          "\"static_replicas\": 1, \"gateway\": {\"external_metric_limit\": "
          "{\"metric\": \"cpu\", \"threshold_ms\": 5}}")),
      ConfigError);
}

TEST_CASE("missing config file is a config error") {
  CHECK_THROWS_AS(load_config_file("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("mode must be one of the two documented values") {
  CHECK_THROWS_AS(
      parse_config_text(with("\"static_replicas\": 1",
                             "\"static_replicas\": 1, \"mode\": \"turbo\"")),
      ConfigError);
}
