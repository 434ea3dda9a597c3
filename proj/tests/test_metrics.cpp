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
#include <vector>

#include "infersim/metrics.hpp"
#include "infersim/rng.hpp"

using namespace infersim;

namespace {

TimePoint at(double seconds) { return kRunStart + from_seconds(seconds); }

RequestRecord ok_record(uint64_t id, const std::string& backend,
                        double send_s, double net_ms, double queue_ms,
                        double compute_ms) {
  RequestRecord r;
  r.request_id = id;
  r.model = "m";
  r.backend_id = backend;
  r.outcome = Outcome::kOk;
  r.t_client_send = at(send_s);
  r.t_gateway_in = r.t_client_send + from_millis(net_ms / 2);
  r.t_enqueue = r.t_gateway_in;
  r.t_compute_start = r.t_enqueue + from_millis(queue_ms);
  r.t_compute_end = r.t_compute_start + from_millis(compute_ms);
  r.t_client_recv = r.t_compute_end + from_millis(net_ms / 2);
  return r;
}

}  // namespace

TEST_CASE("window average of two samples") {
  SlidingWindow series(from_seconds(30.0), 1024);
  series.push(at(1.0), 100.0);
  series.push(at(2.0), 300.0);
  auto avg = window_average(series, at(2.0), from_seconds(30.0));
  REQUIRE(avg.has_value());
  CHECK(*avg == doctest::Approx(200.0));
}

TEST_CASE("empty window has no average") {
  SlidingWindow series(from_seconds(30.0), 1024);
  CHECK_FALSE(window_average(series, at(10.0), from_seconds(30.0)).has_value());
  series.push(at(1.0), 50.0);
  // (now - window, now] excludes everything at or before now - window.
  CHECK_FALSE(series.average(at(31.0), from_seconds(30.0)).has_value());
  CHECK(series.average(at(30.9), from_seconds(30.0)).has_value());
}

TEST_CASE("window bounds are half-open") {
  SlidingWindow series(from_seconds(60.0), 1024);
  series.push(at(10.0), 1.0);
  series.push(at(20.0), 3.0);
  // Window (10, 20]: drops the sample exactly at the lower bound.
  auto avg = series.average(at(20.0), from_seconds(10.0));
  REQUIRE(avg.has_value());
  CHECK(*avg == doctest::Approx(3.0));
  // Window (9.99.., 20] keeps both.
  avg = series.average(at(20.0), from_seconds(10.001));
  REQUIRE(avg.has_value());
  CHECK(*avg == doctest::Approx(2.0));
}

TEST_CASE("constructor and query validation") {
  CHECK_THROWS_AS(SlidingWindow(Duration::zero(), 16), std::invalid_argument);
  CHECK_THROWS_AS(SlidingWindow(from_seconds(1.0), 0), std::invalid_argument);
  SlidingWindow series(from_seconds(1.0), 16);
  CHECK_THROWS_AS(series.average(at(1.0), Duration::zero()),
                  std::invalid_argument);
}

TEST_CASE("span eviction discards old samples") {
  SlidingWindow series(from_seconds(10.0), 1 << 16);
  for (int i = 0; i <= 100; ++i) series.push(at(i), double(i));
  // Only samples in (90, 100] survive the span.
  CHECK(series.size() == 10);
  auto avg = series.average(at(100.0), from_seconds(10.0));
  REQUIRE(avg.has_value());
  CHECK(*avg == doctest::Approx(95.5));
}

TEST_CASE("capacity eviction keeps the newest samples") {
  SlidingWindow series(from_seconds(1000.0), 4);
  for (int i = 0; i < 10; ++i) series.push(at(i), double(i));
  CHECK(series.size() == 4);
  auto avg = series.average(at(9.0), from_seconds(1000.0));
  REQUIRE(avg.has_value());
  CHECK(*avg == doctest::Approx((6 + 7 + 8 + 9) / 4.0));
}

TEST_CASE("windowed average matches a brute-force rescan") {
  Rng rng(2024);
  SlidingWindow series(from_seconds(50.0), 1 << 16);
  std::vector<std::pair<TimePoint, double>> all;
  TimePoint t = kRunStart;
  for (int i = 0; i < 2000; ++i) {
    t += rng.exponential(20.0);
    double value = rng.uniform() * 500.0;
    series.push(t, value);
    all.emplace_back(t, value);

    if (i % 50 != 0) continue;
    Duration window = from_seconds(0.5 + rng.uniform() * 40.0);
    auto got = series.average(t, window);
    double sum = 0.0;
    size_t count = 0;
    for (const auto& [st, sv] : all) {
      if (st > t - window && st <= t) {
        sum += sv;
        ++count;
      }
    }
    if (count == 0) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(*got == doctest::Approx(sum / count).epsilon(1e-9));
    }
  }
}

TEST_CASE("record_request counts every outcome by model") {
  MetricsRegistry registry;
  registry.record_request(ok_record(1, "b0000", 0.0, 2.0, 0.0, 50.0));
  registry.record_request(ok_record(2, "b0000", 0.1, 2.0, 10.0, 50.0));

  RequestRecord rejected;
  rejected.request_id = 3;
  rejected.model = "m";
  rejected.outcome = Outcome::kRejectedRate;
  rejected.t_client_send = at(0.2);
  rejected.t_gateway_in = at(0.201);
  rejected.t_client_recv = at(0.202);
  registry.record_request(rejected);

  CHECK(registry.counter_value("requests_total",
                               {{"model", "m"}, {"outcome", "ok"}}) == 2);
  CHECK(registry.counter_value(
            "requests_total",
            {{"model", "m"}, {"outcome", "rejected_rate"}}) == 1);
  CHECK(registry.counter_value(
            "requests_total",
            {{"model", "m"}, {"outcome", "rejected_auth"}}) == 0);
}

TEST_CASE("label order does not change the counter key") {
  MetricsRegistry registry;
  registry.increment_counter("requests_total",
                             {{"outcome", "ok"}, {"model", "m"}}, 1);
  CHECK(registry.counter_value("requests_total",
                               {{"model", "m"}, {"outcome", "ok"}}) == 1);
}

TEST_CASE("inconsistent ok record is rejected") {
  MetricsRegistry registry;
  RequestRecord r = ok_record(1, "b0000", 0.0, 2.0, 0.0, 50.0);
  r.t_compute_end = r.t_compute_start - from_millis(1.0);
  CHECK_THROWS_AS(registry.record_request(r), std::logic_error);
}

TEST_CASE("pooled queue average weighs backends by sample count") {
  MetricsRegistry registry;
  // Three 100 ms waits on backend a, one 300 ms wait on backend b: the pool
  // average is 150 ms, not the 200 ms mean of per-backend means.
  registry.record_request(ok_record(1, "a", 0.00, 0.0, 100.0, 10.0));
  registry.record_request(ok_record(2, "a", 0.01, 0.0, 100.0, 10.0));
  registry.record_request(ok_record(3, "a", 0.02, 0.0, 100.0, 10.0));
  registry.record_request(ok_record(4, "b", 0.03, 0.0, 300.0, 10.0));

  auto pooled = registry.pooled_queue_average({"a", "b"}, at(5.0),
                                              from_seconds(30.0));
  REQUIRE(pooled.has_value());
  CHECK(to_millis(*pooled) == doctest::Approx(150.0));

  auto only_a = registry.pooled_queue_average({"a"}, at(5.0),
                                              from_seconds(30.0));
  REQUIRE(only_a.has_value());
  CHECK(to_millis(*only_a) == doctest::Approx(100.0));

  CHECK_FALSE(registry.pooled_queue_average({"c"}, at(5.0), from_seconds(30.0))
                  .has_value());
}

TEST_CASE("e2e quantile uses the nearest-rank convention") {
  MetricsRegistry registry;
  // Four ok records with total latencies 10, 20, 30, 40 ms.
  for (int i = 0; i < 4; ++i) {
    registry.record_request(
        ok_record(i + 1, "a", 0.01 * i, 0.0, 0.0, 10.0 * (i + 1)));
  }
  auto p50 = registry.e2e_quantile(at(5.0), from_seconds(30.0), 0.50);
  auto p99 = registry.e2e_quantile(at(5.0), from_seconds(30.0), 0.99);
  REQUIRE(p50.has_value());
  REQUIRE(p99.has_value());
  CHECK(to_millis(*p50) == doctest::Approx(20.0));
  CHECK(to_millis(*p99) == doctest::Approx(40.0));
  CHECK_FALSE(registry.e2e_quantile(at(500.0), from_seconds(1.0), 0.5)
                  .has_value());
}

TEST_CASE("gauges hold the latest value per label set") {
  MetricsRegistry registry;
  registry.set_gauge("ready_replicas", {}, 3.0);
  registry.set_gauge("ready_replicas", {}, 5.0);
  auto value = registry.gauge_value("ready_replicas", {});
  REQUIRE(value.has_value());
  CHECK(*value == 5.0);
  CHECK_FALSE(registry.gauge_value("starting_replicas", {}).has_value());
}
