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

#ifndef INFERSIM_EXPERIMENT_HPP_
#define INFERSIM_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infersim/config.hpp"
#include "infersim/request.hpp"
#include "infersim/time.hpp"

namespace infersim {

/// One row of timeseries.csv. Instantaneous fields (counts) are read at t;
/// interval fields (utilization, busy/live seconds, latency aggregates) cover
/// the window since the previous sample.
struct TimeseriesSample {
  double t_s = 0.0;
  double interval_s = 0.0;
  uint32_t clients = 0;
  uint32_t ready = 0;
  uint32_t starting = 0;
  uint32_t draining = 0;
  uint32_t live = 0;
  std::optional<double> avg_queue_latency_ms;
  std::optional<double> e2e_p50_ms;
  double fleet_busy_s = 0.0;
  double fleet_live_s = 0.0;
  /// Aligned with the run's backend id order; shorter when later backends
  /// did not exist yet (missing entries read as 0).
  std::vector<double> util;
};

struct RunSummary {
  std::string label;
  std::string mode;
  uint64_t seed = 0;
  double schedule_s = 0.0;
  double duration_s = 0.0;
  uint64_t requests_total = 0;
  uint64_t requests_ok = 0;
  uint64_t rejected_auth = 0;
  uint64_t rejected_rate = 0;
  uint64_t rejected_capacity = 0;
  uint64_t no_backend = 0;
  std::optional<Duration> mean_e2e;
  std::optional<Duration> p50_e2e;
  std::optional<Duration> p95_e2e;
  std::optional<Duration> p99_e2e;
  std::optional<Duration> mean_queue;
  double mean_gpu_utilization = 0.0;
  double replica_seconds = 0.0;
  uint64_t peak_in_flight = 0;
  double throughput_rps = 0.0;
};

struct RunResult {
  RunSummary summary;
  std::vector<TimeseriesSample> samples;
  std::vector<std::string> backend_ids;
  std::vector<RequestRecord> records;
  uint64_t requests_sent = 0;
  uint64_t backend_accepted = 0;
  uint64_t backend_served = 0;
};

class Fleet;

/// Aggregates records and fleet accounting into the run summary; shared by
/// both execution modes.
RunSummary summarize_run(const ExperimentConfig& config,
                         const std::vector<RequestRecord>& records,
                         const Fleet& fleet, uint64_t peak_in_flight,
                         TimePoint run_end);

/// Deterministic single-threaded discrete-event run; seed fixes the output
/// byte-for-byte.
RunResult run_virtual(const ExperimentConfig& config);

/// Dispatches on config.mode.
RunResult run_experiment(const ExperimentConfig& config);

std::string render_timeseries_csv(const RunResult& result);
nlohmann::json summary_to_json(const RunSummary& summary);
std::string render_comparison_csv(const std::vector<RunSummary>& rows);

/// Writes timeseries.csv and summary.json into out_dir (created on demand).
void write_run_outputs(const RunResult& result, const std::string& out_dir);

/// Copy of `base` pinned to a fixed replica count (autoscaler removed).
ExperimentConfig static_variant(const ExperimentConfig& base,
                                uint32_t replicas);

/// Runs each config under its label. Throws std::invalid_argument unless all
/// configs share schedule, seed, and model profiles.
std::vector<RunSummary> compare_runs(
    const std::vector<ExperimentConfig>& configs,
    const std::vector<std::string>& labels);

}  // namespace infersim

#endif  // INFERSIM_EXPERIMENT_HPP_
