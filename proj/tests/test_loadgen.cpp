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

#include "infersim/loadgen.hpp"
#include "infersim/model_profile.hpp"

using namespace infersim;

namespace {

PhaseSchedule two_phase() {
  PhaseSchedule schedule;
  schedule.phases = {Phase{from_seconds(10.0), 1},
                     Phase{from_seconds(10.0), 5}};
  schedule.client.model = "m";
  schedule.client.batch_size = 10;
  schedule.client.think_time = from_millis(50.0);
  return schedule;
}

}  // namespace

TEST_CASE("clients_at follows the phase boundaries half-open") {
  PhaseSchedule schedule = two_phase();
  CHECK(clients_at(schedule, kRunStart) == 1);
  CHECK(clients_at(schedule, kRunStart + from_seconds(9.999)) == 1);
  CHECK(clients_at(schedule, kRunStart + from_seconds(10.0)) == 5);
  CHECK(clients_at(schedule, kRunStart + from_seconds(19.999)) == 5);
  CHECK(clients_at(schedule, kRunStart + from_seconds(20.0)) == 0);
  CHECK(clients_at(schedule, kRunStart + from_seconds(50.0)) == 0);
}

TEST_CASE("total duration sums the phases") {
  CHECK(to_seconds(total_duration(two_phase())) == doctest::Approx(20.0));
}

TEST_CASE("schedule validation rejects malformed phases") {
  PhaseSchedule schedule = two_phase();
  CHECK_NOTHROW(validate(schedule));

  PhaseSchedule empty = schedule;
  empty.phases.clear();
  CHECK_THROWS_AS(validate(empty), std::invalid_argument);

  PhaseSchedule zero = schedule;
  zero.phases[0].duration = Duration::zero();
  CHECK_THROWS_AS(validate(zero), std::invalid_argument);

  PhaseSchedule no_model = schedule;
  no_model.client.model.clear();
  CHECK_THROWS_AS(validate(no_model), std::invalid_argument);

  PhaseSchedule bad_batch = schedule;
  bad_batch.client.batch_size = 0;
  CHECK_THROWS_AS(validate(bad_batch), std::invalid_argument);

  PhaseSchedule bad_think = schedule;
  bad_think.client.think_time = from_millis(-1.0);
  CHECK_THROWS_AS(validate(bad_think), std::invalid_argument);
}

TEST_CASE("retry backoff falls back to 100 ms when think time is zero") {
  CHECK(retry_backoff(from_millis(50.0)) == from_millis(50.0));
  CHECK(retry_backoff(from_millis(0.25)) == from_millis(0.25));
  CHECK(retry_backoff(Duration::zero()) == from_millis(100.0));
}

TEST_CASE("default calibration lands on batch 10 and 50 ms think time") {
  // base 40 ms + batch * 1 ms aimed at a 50 ms service time: one client
  // offers 10 req/s against 20 req/s capacity, ten clients offer 100 req/s.
  ModelProfile profile{"m", from_millis(40.0), from_millis(1.0), 0.0};
  Calibration c = calibrate(profile);
  CHECK(c.batch_size == 10);
  CHECK(to_millis(c.think_time) == doctest::Approx(50.0));
}

TEST_CASE("calibration without a per-item term uses batch 1") {
  ModelProfile profile{"m", from_millis(30.0), Duration::zero(), 0.0};
  Calibration c = calibrate(profile);
  CHECK(c.batch_size == 1);
  CHECK(to_millis(c.think_time) == doctest::Approx(30.0));
}

TEST_CASE("calibration clamps the batch to at least one") {
  ModelProfile profile{"m", from_millis(80.0), from_millis(5.0), 0.0};
  Calibration c = calibrate(profile);
  CHECK(c.batch_size == 1);
  CHECK(to_millis(c.think_time) == doctest::Approx(85.0));
}

TEST_CASE("calibration keeps one client sustainable and ten clients not") {
  for (double base_ms : {10.0, 25.0, 40.0, 49.0}) {
    ModelProfile profile{"m", from_millis(base_ms), from_millis(1.0), 0.0};
    Calibration c = calibrate(profile);
    double service_s =
        to_seconds(profile.base_time) +
        double(c.batch_size) * to_seconds(profile.per_item_time);
    double capacity = 1.0 / service_s;
    double one_client = 1.0 / (service_s + to_seconds(c.think_time));
    CAPTURE(base_ms);
    CHECK(one_client < capacity);
    CHECK(10.0 * one_client > capacity);
  }
}

TEST_CASE("calibration rejects infeasible profiles") {
  ModelProfile jittery{"m", from_millis(40.0), from_millis(1.0), 0.25};
  CHECK_THROWS_AS(calibrate(jittery), std::invalid_argument);
  ModelProfile zero{"m", Duration::zero(), Duration::zero(), 0.0};
  CHECK_THROWS_AS(calibrate(zero), std::invalid_argument);
}
