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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "infersim/config.hpp"
#include "infersim/experiment.hpp"

using namespace infersim;

namespace {

ExperimentConfig base_config(uint32_t clients, double duration_s,
                             uint32_t static_replicas) {
  ExperimentConfig config;
  config.mode = RunMode::kVirtual;
  config.seed = 1;
  config.network_delay = from_millis(1.0);

  ModelProfile model;
  model.name = "m";
  model.base_time = from_millis(40.0);
  model.per_item_time = from_millis(1.0);
  config.models.push_back(model);

  config.gateway.auth_enabled = true;
  config.gateway.valid_tokens = {"tok"};
  config.gateway.max_concurrent_connections = 64;

  config.backend.queue_capacity = 1000;
  config.backend.startup_delay = from_seconds(10.0);

  config.static_replicas = static_replicas;

  config.schedule.phases = {Phase{from_seconds(duration_s), clients}};
  config.schedule.client.model = "m";
  config.schedule.client.batch_size = 10;
  config.schedule.client.think_time = from_millis(50.0);
  config.schedule.client.token = "tok";
  return config;
}

void check_conservation(const RunResult& result) {
  for (const RequestRecord& r : result.records) {
    if (r.outcome != Outcome::kOk) continue;
    CHECK(r.total_time() ==
          r.network_time() + r.queue_time() + r.compute_time());
    CHECK(r.timestamps_ordered());
  }
}

}  // namespace

TEST_CASE("one calibrated client sees no queueing and half utilization") {
  RunResult result = run_virtual(base_config(1, 60.0, 1));
  const RunSummary& s = result.summary;

  CHECK(s.requests_total == s.requests_ok);
  // Duty cycle: 52 ms in flight (1 ms + 50 ms + 1 ms), 50 ms thinking.
  CHECK(s.requests_ok == doctest::Approx(60.0 / 0.102).epsilon(0.01));
  REQUIRE(s.mean_e2e.has_value());
  CHECK(to_millis(*s.mean_e2e) == doctest::Approx(52.0));
  REQUIRE(s.p99_e2e.has_value());
  CHECK(to_millis(*s.p99_e2e) == doctest::Approx(52.0));
  REQUIRE(s.mean_queue.has_value());
  CHECK(to_millis(*s.mean_queue) == doctest::Approx(0.0));
  CHECK(s.mean_gpu_utilization == doctest::Approx(50.0 / 102.0).epsilon(0.01));
  CHECK(s.peak_in_flight == 1);
  CHECK(s.throughput_rps == doctest::Approx(1000.0 / 102.0).epsilon(0.01));
  check_conservation(result);
}

TEST_CASE("ten clients saturate a single replica") {
  RunResult result = run_virtual(base_config(10, 60.0, 1));
  const RunSummary& s = result.summary;

  REQUIRE(s.mean_queue.has_value());
  CHECK(to_millis(*s.mean_queue) > 200.0);
  // Closed-loop equilibrium wait: 10 * 0.102 / 2 - 0.102 = 0.398 s. The last
  // completions of the run should sit near it.
  std::vector<const RequestRecord*> ok;
  for (const RequestRecord& r : result.records) {
    if (r.outcome == Outcome::kOk) ok.push_back(&r);
  }
  REQUIRE(ok.size() > 100);
  double late_queue_ms = 0.0;
  for (size_t i = ok.size() - 50; i < ok.size(); ++i) {
    late_queue_ms += to_millis(ok[i]->queue_time());
  }
  CHECK(late_queue_ms / 50.0 == doctest::Approx(398.0).epsilon(0.05));
  CHECK(s.mean_gpu_utilization > 0.9);
  CHECK(s.peak_in_flight <= 10);
  check_conservation(result);
}

TEST_CASE("a static fleet never changes size") {
  RunResult result = run_virtual(base_config(10, 30.0, 3));
  for (const TimeseriesSample& row : result.samples) {
    CHECK(row.ready == 3);
    CHECK(row.starting == 0);
    CHECK(row.draining == 0);
    CHECK(row.live == 3);
  }
  CHECK(result.summary.replica_seconds ==
        doctest::Approx(3.0 * result.summary.duration_s));
}

TEST_CASE("every request is recorded exactly once") {
  RunResult result = run_virtual(base_config(10, 30.0, 2));
  CHECK(result.records.size() == result.requests_sent);
  CHECK(result.records.size() == result.summary.requests_total);
  CHECK(result.backend_accepted == result.backend_served);
  CHECK(result.backend_accepted == result.summary.requests_ok);

  std::vector<uint64_t> ids;
  for (const RequestRecord& r : result.records) ids.push_back(r.request_id);
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("same config and seed reproduce identical outputs") {
  ExperimentConfig config = base_config(4, 45.0, 0);
  config.static_replicas.reset();
  AutoscalerConfig autoscaler;
  autoscaler.downscale_stabilization = from_seconds(20.0);
  autoscaler.metric_window = from_seconds(10.0);
  config.autoscaler = autoscaler;
  config.models[0].jitter_sigma = 0.25;
  config.seed = 2024;

  RunResult a = run_virtual(config);
  RunResult b = run_virtual(config);
  CHECK(render_timeseries_csv(a) == render_timeseries_csv(b));
  CHECK(summary_to_json(a.summary).dump(2) ==
        summary_to_json(b.summary).dump(2));

  config.seed = 2025;
  RunResult c = run_virtual(config);
  CHECK(render_timeseries_csv(a) != render_timeseries_csv(c));
}

TEST_CASE("connection limit rejections bound the in-flight count") {
  ExperimentConfig config = base_config(10, 30.0, 1);
  config.gateway.max_concurrent_connections = 3;
  RunResult result = run_virtual(config);
  const RunSummary& s = result.summary;

  CHECK(s.rejected_rate > 0);
  CHECK(s.requests_ok + s.rejected_rate == s.requests_total);
  CHECK(s.peak_in_flight <= 3);

  for (const RequestRecord& r : result.records) {
    if (r.outcome != Outcome::kRejectedRate) continue;
    CHECK(r.backend_id.empty());
    CHECK(r.queue_time() == Duration::zero());
    CHECK(r.compute_time() == Duration::zero());
    CHECK(r.total_time() == r.network_time());
    CHECK(to_millis(r.total_time()) == doctest::Approx(2.0));
  }
  check_conservation(result);
}

TEST_CASE("the external metric limit sheds load under pressure") {
  ExperimentConfig config = base_config(10, 60.0, 1);
  config.gateway.external_metric_limit =
      ExternalMetricLimit{"avg_queue_latency_ms", 150.0};
  RunResult result = run_virtual(config);
  CHECK(result.summary.rejected_rate > 0);
  CHECK(result.summary.requests_ok > 0);
  check_conservation(result);
}

TEST_CASE("autoscaled fleet grows under load and the outputs stay lossless") {
  ExperimentConfig config = base_config(10, 120.0, 0);
  config.static_replicas.reset();
  AutoscalerConfig autoscaler;
  autoscaler.max_replicas = 10;
  autoscaler.downscale_stabilization = from_seconds(30.0);
  config.autoscaler = autoscaler;
  config.backend.startup_delay = from_seconds(5.0);

  RunResult result = run_virtual(config);
  uint32_t peak = 0;
  for (const TimeseriesSample& row : result.samples) {
    peak = std::max(peak, row.ready + row.starting);
    CHECK(row.ready + row.starting >= 1);
    CHECK(row.ready + row.starting <= 10);
  }
  CHECK(peak > 1);
  CHECK(result.summary.requests_total == result.summary.requests_ok);
  CHECK(result.backend_accepted == result.backend_served);
  check_conservation(result);
}

TEST_CASE("timeseries rows are one per second plus a drain tail") {
  RunResult result = run_virtual(base_config(2, 30.0, 1));
  REQUIRE(result.samples.size() >= 31);
  CHECK(result.samples.front().t_s == doctest::Approx(0.0));
  for (size_t i = 1; i < result.samples.size(); ++i) {
    CHECK(result.samples[i].t_s > result.samples[i - 1].t_s);
    CHECK(result.samples[i].interval_s ==
          doctest::Approx(result.samples[i].t_s - result.samples[i - 1].t_s));
  }
  CHECK(result.samples.back().t_s >= 30.0);
}

TEST_CASE("timeseries utilization agrees with the busy accounting") {
  RunResult result = run_virtual(base_config(6, 40.0, 2));
  double busy_from_rows = 0.0;
  double live_from_rows = 0.0;
  for (const TimeseriesSample& row : result.samples) {
    busy_from_rows += row.fleet_busy_s;
    live_from_rows += row.fleet_live_s;
  }
  CHECK(busy_from_rows / live_from_rows ==
        doctest::Approx(result.summary.mean_gpu_utilization).epsilon(0.001));
  CHECK(live_from_rows ==
        doctest::Approx(result.summary.replica_seconds).epsilon(0.001));
}

TEST_CASE("csv and json renderings carry the documented fields") {
  RunResult result = run_virtual(base_config(2, 10.0, 1));
  std::string csv = render_timeseries_csv(result);
  CHECK(csv.rfind("t_s,clients,ready_replicas,starting_replicas,"
                  "draining_replicas,live_replicas,avg_queue_latency_ms,"
                  "e2e_p50_ms,fleet_busy_s,fleet_live_s,util_b0000",
                  0) == 0);

  nlohmann::json j = summary_to_json(result.summary);
  for (const char* key :
       {"mode", "seed", "schedule_s", "duration_s", "requests_total",
        "requests_ok", "rejected_auth", "rejected_rate", "rejected_capacity",
        "no_backend", "mean_e2e_latency_ms", "p50_e2e_latency_ms",
        "p95_e2e_latency_ms", "p99_e2e_latency_ms", "mean_queue_latency_ms",
        "mean_gpu_utilization", "replica_seconds", "peak_in_flight",
        "throughput_rps"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["mode"] == "virtual");
}

TEST_CASE("comparison rows keep their labels and schema") {
  ExperimentConfig dynamic = base_config(6, 20.0, 0);
  dynamic.static_replicas.reset();
  dynamic.autoscaler = AutoscalerConfig{};

  std::vector<ExperimentConfig> configs = {dynamic, static_variant(dynamic, 2)};
  std::vector<RunSummary> rows = compare_runs(configs, {"dynamic", "static_2"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].label == "dynamic");
  CHECK(rows[1].label == "static_2");

  std::string csv = render_comparison_csv(rows);
  CHECK(csv.rfind("label,mean_e2e_latency_ms,p99_e2e_latency_ms,"
                  "mean_queue_latency_ms,mean_gpu_utilization,"
                  "replica_seconds,requests_ok,requests_total",
                  0) == 0);
  CHECK(csv.find("\ndynamic,") != std::string::npos);
  CHECK(csv.find("\nstatic_2,") != std::string::npos);
}

TEST_CASE("compare refuses mismatched experiment setups") {
  ExperimentConfig dynamic = base_config(6, 20.0, 0);
  dynamic.static_replicas.reset();
  dynamic.autoscaler = AutoscalerConfig{};

  ExperimentConfig other = static_variant(dynamic, 2);
  other.schedule.phases[0].duration = from_seconds(21.0);
  CHECK_THROWS_AS(compare_runs({dynamic, other}, {"a", "b"}),
                  std::invalid_argument);

  ExperimentConfig seed_mismatch = static_variant(dynamic, 2);
  seed_mismatch.seed = 9;
  CHECK_THROWS_AS(compare_runs({dynamic, seed_mismatch}, {"a", "b"}),
                  std::invalid_argument);

  CHECK_THROWS_AS(compare_runs({dynamic}, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("static_variant strips the autoscaler and pins the fleet") {
  ExperimentConfig dynamic = base_config(6, 20.0, 0);
  dynamic.static_replicas.reset();
  dynamic.autoscaler = AutoscalerConfig{};

  ExperimentConfig pinned = static_variant(dynamic, 5);
  CHECK_FALSE(pinned.autoscaler.has_value());
  REQUIRE(pinned.static_replicas.has_value());
  CHECK(*pinned.static_replicas == 5);
  CHECK(initial_replicas(pinned) == 5);
  CHECK(pinned.schedule == dynamic.schedule);
}

TEST_CASE("run_virtual validates its input") {
  ExperimentConfig config = base_config(1, 10.0, 1);
  config.mode = RunMode::kWallClock;
  CHECK_THROWS_AS(run_virtual(config), std::invalid_argument);

  ExperimentConfig broken = base_config(1, 10.0, 1);
  broken.autoscaler = AutoscalerConfig{};
  CHECK_THROWS_AS(run_virtual(broken), ConfigError);
}

TEST_CASE("constant load settles the controller inside the dead band") {
  // Four calibrated clients on one replica equilibrate at a 98 ms queue:
  // N / (0.102 s + W) = 20 req/s per replica gives W = N/20 - 0.102 s.
  // 98 ms sits inside the 10% dead band around the 100 ms target, so the
  // controller must never act.
  auto autoscaled = [](uint32_t clients, uint32_t max_replicas) {
    ExperimentConfig config = base_config(clients, 300.0, 1);
    config.static_replicas.reset();
    AutoscalerConfig scaler;
    scaler.max_replicas = max_replicas;
    config.autoscaler = scaler;
    return config;
  };

  SUBCASE("four clients hold one replica steady") {
    RunResult result = run_virtual(autoscaled(4, 10));
    for (const TimeseriesSample& row : result.samples) {
      CHECK(row.ready + row.starting == 1);
    }
    double sum = 0.0;
    int count = 0;
    for (const TimeseriesSample& row : result.samples) {
      if (row.t_s < 200.0 || !row.avg_queue_latency_ms) continue;
      sum += *row.avg_queue_latency_ms;
      ++count;
    }
    REQUIRE(count > 50);
    CHECK(sum / count == doctest::Approx(98.0).epsilon(0.02));
    CHECK(result.summary.throughput_rps == doctest::Approx(20.0).epsilon(0.01));
  }

  SUBCASE("eight clients settle at two replicas within ten polls") {
    RunResult result = run_virtual(autoscaled(8, 2));
    double settled_at = -1.0;
    for (const TimeseriesSample& row : result.samples) {
      uint32_t n = row.ready + row.starting;
      if (settled_at < 0.0) {
        if (n == 2) settled_at = row.t_s;
      } else {
        CHECK(n == 2);
      }
    }
    REQUIRE(settled_at >= 0.0);
    CHECK(settled_at <= 50.0);

    double sum = 0.0;
    int count = 0;
    for (const TimeseriesSample& row : result.samples) {
      if (row.t_s < 200.0 || !row.avg_queue_latency_ms) continue;
      sum += *row.avg_queue_latency_ms;
      ++count;
    }
    REQUIRE(count > 50);
    CHECK(sum / count == doctest::Approx(98.0).epsilon(0.03));

    // Settled count covers the realized demand: n >= ceil(L * s).
    double demand = result.summary.throughput_rps * 0.050;
    CHECK(2.0 >= std::ceil(demand));
    CHECK(result.summary.throughput_rps == doctest::Approx(39.0).epsilon(0.03));
  }

  SUBCASE("a controller that never acts matches the pinned fleet") {
    RunResult dynamic = run_virtual(autoscaled(4, 10));
    RunResult pinned = run_virtual(base_config(4, 300.0, 1));
    CHECK(dynamic.summary.requests_ok == pinned.summary.requests_ok);
    REQUIRE(dynamic.summary.mean_e2e.has_value());
    REQUIRE(pinned.summary.mean_e2e.has_value());
    CHECK(*dynamic.summary.mean_e2e == *pinned.summary.mean_e2e);
    CHECK(dynamic.summary.mean_gpu_utilization ==
          doctest::Approx(pinned.summary.mean_gpu_utilization).epsilon(1e-9));
    CHECK(dynamic.summary.replica_seconds ==
          doctest::Approx(pinned.summary.replica_seconds).epsilon(1e-9));
  }
}
