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

#include "infersim/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "infersim/autoscaler.hpp"
#include "infersim/fleet.hpp"
#include "infersim/gateway.hpp"
#include "infersim/loadgen.hpp"
#include "infersim/metrics.hpp"
#include "infersim/rng.hpp"
#include "infersim/wallclock_runtime.hpp"

namespace infersim {

namespace {

std::optional<Duration> quantile(const std::vector<Duration>& sorted,
                                 double q) {
  if (sorted.empty()) return std::nullopt;
  size_t rank =
      static_cast<size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  if (rank > 0) --rank;
  return sorted[std::min(rank, sorted.size() - 1)];
}

/// Closed-loop clients, fleet, gateway, and optional autoscaler wired onto a
/// single event queue. Every fleet mutation is followed by a wake scheduled
/// at the fleet's next transition, so completions and Ready promotions are
/// observed at their exact instants.
class VirtualDriver {
 public:
  explicit VirtualDriver(const ExperimentConfig& config)
      : config_(config),
        rng_(config.seed),
        metrics_(metric_span(config), metric_span(config)),
        fleet_(config.backend),
        gateway_(config.gateway, fleet_, model_map(config), metrics_),
        schedule_end_(kRunStart + total_duration(config.schedule)) {
    if (config_.autoscaler) {
      autoscaler_.emplace(*config_.autoscaler, fleet_, metrics_);
    }
    if (config_.gateway.external_metric_limit) {
      gateway_.set_external_metric_source([this] {
        std::optional<Duration> avg = metrics_.pooled_queue_average(
            fleet_.metric_source_ids(), clock_.now(), external_metric_window());
        if (!avg) return std::optional<double>();
        return std::optional<double>(to_millis(*avg));
      });
    }
  }

  RunResult run();

 private:
  static Duration metric_span(const ExperimentConfig& config) {
    Duration span = from_seconds(30.0);
    if (config.autoscaler && config.autoscaler->metric_window > span) {
      span = config.autoscaler->metric_window;
    }
    return span;
  }

  static std::map<std::string, ModelProfile> model_map(
      const ExperimentConfig& config) {
    std::map<std::string, ModelProfile> models;
    for (const ModelProfile& model : config.models) {
      models.emplace(model.name, model);
    }
    return models;
  }

  Duration external_metric_window() const {
    return config_.autoscaler ? config_.autoscaler->metric_window
                              : from_seconds(30.0);
  }

  void client_send(uint32_t client, TimePoint t);
  void gateway_arrival(uint32_t client, InferenceRequest request,
                       TimePoint t_client_send, TimePoint now);
  void deliver(uint32_t client, RequestRecord record, bool ok, TimePoint now);
  void pump_fleet(TimePoint now);
  void schedule_fleet_wake();
  void sample(TimePoint now, TimePoint prev);
  RunSummary build_summary(TimePoint run_end) const;

  const ExperimentConfig& config_;
  VirtualClock clock_;
  EventQueue events_;
  Rng rng_;
  MetricsRegistry metrics_;
  Fleet fleet_;
  Gateway gateway_;
  std::optional<Autoscaler> autoscaler_;
  TimePoint schedule_end_;

  std::vector<bool> client_active_;
  std::map<uint64_t, uint32_t> owner_by_request_;
  std::set<TimePoint> scheduled_wakes_;
  uint64_t next_request_id_ = 1;
  std::vector<RequestRecord> records_;
  std::vector<TimeseriesSample> samples_;
};

void VirtualDriver::client_send(uint32_t client, TimePoint t) {
  if (clients_at(config_.schedule, t) <= client) {
    client_active_[client] = false;
    return;
  }
  client_active_[client] = true;

  InferenceRequest request;
  request.request_id = next_request_id_++;
  request.model = config_.schedule.client.model;
  request.batch_size = config_.schedule.client.batch_size;
  request.token = config_.schedule.client.token;
  request.payload_size = config_.schedule.client.payload_size;

  TimePoint arrival = t + config_.network_delay;
  events_.at(arrival, [this, client, request = std::move(request), t, arrival] {
    gateway_arrival(client, request, t, arrival);
  });
}

void VirtualDriver::gateway_arrival(uint32_t client, InferenceRequest request,
                                    TimePoint t_client_send, TimePoint now) {
  RouteResult routed = gateway_.route(request, t_client_send, now, rng_);
  if (routed.outcome == Outcome::kOk) {
    owner_by_request_[request.request_id] = client;
    schedule_fleet_wake();
    return;
  }
  TimePoint recv = now + config_.network_delay;
  events_.at(recv, [this, client, record = std::move(*routed.rejection),
                    recv]() mutable {
    deliver(client, std::move(record), false, recv);
  });
}

void VirtualDriver::deliver(uint32_t client, RequestRecord record, bool ok,
                            TimePoint now) {
  record.t_client_recv = now;
  metrics_.record_request(record);
  records_.push_back(std::move(record));
  if (ok) gateway_.on_response_delivered();

  Duration wait = ok ? config_.schedule.client.think_time
                     : retry_backoff(config_.schedule.client.think_time);
  TimePoint next = now + wait;
  if (clients_at(config_.schedule, next) <= client) {
    client_active_[client] = false;
    return;
  }
  events_.at(next, [this, client, next] { client_send(client, next); });
}

void VirtualDriver::pump_fleet(TimePoint now) {
  std::vector<RequestRecord> done = fleet_.advance_all(now);
  for (RequestRecord& record : done) {
    auto owner = owner_by_request_.find(record.request_id);
    if (owner == owner_by_request_.end()) {
      throw std::logic_error("completed request has no owning client");
    }
    uint32_t client = owner->second;
    owner_by_request_.erase(owner);
    TimePoint recv =
        std::max(now, record.t_compute_end + config_.network_delay);
    events_.at(recv, [this, client, record = std::move(record),
                      recv]() mutable {
      deliver(client, std::move(record), true, recv);
    });
  }
}

void VirtualDriver::schedule_fleet_wake() {
  std::optional<TimePoint> next = fleet_.next_event_time();
  if (!next) return;
  if (!scheduled_wakes_.insert(*next).second) return;
  TimePoint t = *next;
  events_.at(t, [this, t] {
    scheduled_wakes_.erase(t);
    pump_fleet(t);
    schedule_fleet_wake();
  });
}

void VirtualDriver::sample(TimePoint now, TimePoint prev) {
  pump_fleet(now);
  TimeseriesSample row;
  row.t_s = to_seconds(now - kRunStart);
  row.interval_s = to_seconds(now - prev);
  row.clients = clients_at(config_.schedule, now);
  row.ready = fleet_.ready_count();
  row.starting = fleet_.starting_count();
  row.draining = fleet_.draining_count();
  row.live = fleet_.live_count();
  if (now > prev) {
    std::optional<Duration> qavg =
        metrics_.pooled_queue_average(fleet_.all_ids(), now, now - prev);
    if (qavg) row.avg_queue_latency_ms = to_millis(*qavg);
    std::optional<Duration> p50 = metrics_.e2e_quantile(now, now - prev, 0.5);
    if (p50) row.e2e_p50_ms = to_millis(*p50);
    row.fleet_busy_s = to_seconds(fleet_.total_busy_in(prev, now));
    row.fleet_live_s = to_seconds(fleet_.total_lifetime_in(prev, now));
    for (const BackendInstance* instance : fleet_.all_instances()) {
      row.util.push_back(to_seconds(instance->busy_in(prev, now)) /
                         to_seconds(now - prev));
    }
  }
  samples_.push_back(std::move(row));
}

RunSummary VirtualDriver::build_summary(TimePoint run_end) const {
  return summarize_run(config_, records_, fleet_, gateway_.peak_active(),
                       run_end);
}

}  // namespace

RunSummary summarize_run(const ExperimentConfig& config,
                         const std::vector<RequestRecord>& records,
                         const Fleet& fleet, uint64_t peak_in_flight,
                         TimePoint run_end) {
  RunSummary summary;
  summary.mode = config.mode == RunMode::kVirtual ? "virtual" : "wallclock";
  summary.seed = config.seed;
  summary.schedule_s = to_seconds(total_duration(config.schedule));
  summary.duration_s = to_seconds(run_end - kRunStart);
  summary.requests_total = records.size();
  summary.peak_in_flight = peak_in_flight;

  std::vector<Duration> e2e;
  Duration e2e_sum{};
  Duration queue_sum{};
  for (const RequestRecord& record : records) {
    switch (record.outcome) {
      case Outcome::kOk:
        ++summary.requests_ok;
        e2e.push_back(record.total_time());
        e2e_sum += record.total_time();
        queue_sum += record.queue_time();
        break;
      case Outcome::kRejectedAuth:
        ++summary.rejected_auth;
        break;
      case Outcome::kRejectedRate:
        ++summary.rejected_rate;
        break;
      case Outcome::kRejectedCapacity:
        ++summary.rejected_capacity;
        break;
      case Outcome::kNoBackend:
        ++summary.no_backend;
        break;
    }
  }
  if (!e2e.empty()) {
    std::sort(e2e.begin(), e2e.end());
    summary.mean_e2e = e2e_sum / static_cast<Duration::rep>(e2e.size());
    summary.p50_e2e = quantile(e2e, 0.50);
    summary.p95_e2e = quantile(e2e, 0.95);
    summary.p99_e2e = quantile(e2e, 0.99);
    summary.mean_queue = queue_sum / static_cast<Duration::rep>(e2e.size());
  }

  Duration busy = fleet.total_busy_in(kRunStart, run_end);
  Duration lifetime = fleet.total_lifetime_in(kRunStart, run_end);
  summary.replica_seconds = to_seconds(lifetime);
  summary.mean_gpu_utilization =
      lifetime > Duration::zero() ? to_seconds(busy) / to_seconds(lifetime)
                                  : 0.0;
  if (summary.duration_s > 0.0) {
    summary.throughput_rps =
        static_cast<double>(summary.requests_ok) / summary.duration_s;
  }
  return summary;
}

namespace {

RunResult VirtualDriver::run() {
  uint32_t replicas = initial_replicas(config_);
  for (uint32_t i = 0; i < replicas; ++i) fleet_.spawn_ready(clock_.now());

  uint32_t max_clients = 0;
  for (const Phase& phase : config_.schedule.phases) {
    max_clients = std::max(max_clients, phase.client_count);
  }
  client_active_.assign(max_clients, false);

  Duration schedule_span = schedule_end_ - kRunStart;
  int64_t whole_seconds =
      std::chrono::duration_cast<std::chrono::seconds>(schedule_span).count();
  TimePoint prev = kRunStart;
  for (int64_t s = 0; s <= whole_seconds; ++s) {
    TimePoint t = kRunStart + std::chrono::seconds(s);
    events_.at(t, [this, t, prev] { sample(t, prev); });
    prev = t;
  }
  if (kRunStart + std::chrono::seconds(whole_seconds) < schedule_end_) {
    TimePoint t = schedule_end_;
    events_.at(t, [this, t, prev] { sample(t, prev); });
  }

  if (autoscaler_) {
    Duration poll = autoscaler_->config().poll_interval;
    for (TimePoint t = kRunStart + poll; t <= schedule_end_; t += poll) {
      events_.at(t, [this, t] {
        pump_fleet(t);
        autoscaler_->reconcile(t);
        schedule_fleet_wake();
      });
    }
  }

  TimePoint phase_start = kRunStart;
  for (const Phase& phase : config_.schedule.phases) {
    TimePoint t = phase_start;
    events_.at(t, [this, t] {
      uint32_t wanted = clients_at(config_.schedule, t);
      for (uint32_t c = 0; c < client_active_.size(); ++c) {
        if (c < wanted && !client_active_[c]) {
          client_active_[c] = true;
          events_.at(t, [this, c, t] { client_send(c, t); });
        }
      }
    });
    phase_start += phase.duration;
  }

  events_.run(clock_);
  TimePoint run_end = std::max(clock_.now(), schedule_end_);
  if (run_end > schedule_end_) {
    sample(run_end, schedule_end_);
  }

  RunResult result;
  result.summary = build_summary(run_end);
  result.samples = std::move(samples_);
  result.backend_ids = fleet_.all_ids();
  result.records = std::move(records_);
  result.requests_sent = next_request_id_ - 1;
  result.backend_accepted = fleet_.total_accepted();
  result.backend_served = fleet_.total_served();
  return result;
}

void append_csv_double(std::string& out, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  out += buf;
}

}  // namespace

RunResult run_virtual(const ExperimentConfig& config) {
  validate(config);
  if (config.mode != RunMode::kVirtual) {
    throw std::invalid_argument("run_virtual requires a virtual-mode config");
  }
  VirtualDriver driver(config);
  return driver.run();
}

RunResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  return config.mode == RunMode::kVirtual ? run_virtual(config)
                                          : run_wallclock(config);
}

std::string render_timeseries_csv(const RunResult& result) {
  std::string out =
      "t_s,clients,ready_replicas,starting_replicas,draining_replicas,"
      "live_replicas,avg_queue_latency_ms,e2e_p50_ms,fleet_busy_s,fleet_live_s";
  for (const std::string& id : result.backend_ids) {
    out += ",util_" + id;
  }
  out += '\n';

  for (const TimeseriesSample& row : result.samples) {
    append_csv_double(out, row.t_s);
    out += ',' + std::to_string(row.clients);
    out += ',' + std::to_string(row.ready);
    out += ',' + std::to_string(row.starting);
    out += ',' + std::to_string(row.draining);
    out += ',' + std::to_string(row.live);
    out += ',';
    if (row.avg_queue_latency_ms) append_csv_double(out, *row.avg_queue_latency_ms);
    out += ',';
    if (row.e2e_p50_ms) append_csv_double(out, *row.e2e_p50_ms);
    out += ',';
    append_csv_double(out, row.fleet_busy_s);
    out += ',';
    append_csv_double(out, row.fleet_live_s);
    for (size_t i = 0; i < result.backend_ids.size(); ++i) {
      out += ',';
      append_csv_double(out, i < row.util.size() ? row.util[i] : 0.0);
    }
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json millis_or_null(const std::optional<Duration>& value) {
  if (!value) return nullptr;
  return to_millis(*value);
}

}  // namespace

nlohmann::json summary_to_json(const RunSummary& summary) {
  nlohmann::json j;
  if (!summary.label.empty()) j["label"] = summary.label;
  j["mode"] = summary.mode;
  j["seed"] = summary.seed;
  j["schedule_s"] = summary.schedule_s;
  j["duration_s"] = summary.duration_s;
  j["requests_total"] = summary.requests_total;
  j["requests_ok"] = summary.requests_ok;
  j["rejected_auth"] = summary.rejected_auth;
  j["rejected_rate"] = summary.rejected_rate;
  j["rejected_capacity"] = summary.rejected_capacity;
  j["no_backend"] = summary.no_backend;
  j["mean_e2e_latency_ms"] = millis_or_null(summary.mean_e2e);
  j["p50_e2e_latency_ms"] = millis_or_null(summary.p50_e2e);
  j["p95_e2e_latency_ms"] = millis_or_null(summary.p95_e2e);
  j["p99_e2e_latency_ms"] = millis_or_null(summary.p99_e2e);
  j["mean_queue_latency_ms"] = millis_or_null(summary.mean_queue);
  j["mean_gpu_utilization"] = summary.mean_gpu_utilization;
  j["replica_seconds"] = summary.replica_seconds;
  j["peak_in_flight"] = summary.peak_in_flight;
  j["throughput_rps"] = summary.throughput_rps;
  return j;
}

std::string render_comparison_csv(const std::vector<RunSummary>& rows) {
  std::string out =
      "label,mean_e2e_latency_ms,p99_e2e_latency_ms,mean_queue_latency_ms,"
      "mean_gpu_utilization,replica_seconds,requests_ok,requests_total\n";
  for (const RunSummary& row : rows) {
    out += row.label;
    out += ',';
    if (row.mean_e2e) append_csv_double(out, to_millis(*row.mean_e2e));
    out += ',';
    if (row.p99_e2e) append_csv_double(out, to_millis(*row.p99_e2e));
    out += ',';
    if (row.mean_queue) append_csv_double(out, to_millis(*row.mean_queue));
    out += ',';
    append_csv_double(out, row.mean_gpu_utilization);
    out += ',';
    append_csv_double(out, row.replica_seconds);
    out += ',' + std::to_string(row.requests_ok);
    out += ',' + std::to_string(row.requests_total);
    out += '\n';
  }
  return out;
}

void write_run_outputs(const RunResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(std::filesystem::path(out_dir) / "timeseries.csv",
                      std::ios::binary);
    csv << render_timeseries_csv(result);
  }
  {
    std::ofstream json_out(std::filesystem::path(out_dir) / "summary.json",
                           std::ios::binary);
    json_out << summary_to_json(result.summary).dump(2) << '\n';
  }
}

ExperimentConfig static_variant(const ExperimentConfig& base,
                                uint32_t replicas) {
  ExperimentConfig config = base;
  config.autoscaler.reset();
  config.static_replicas = replicas;
  return config;
}

std::vector<RunSummary> compare_runs(
    const std::vector<ExperimentConfig>& configs,
    const std::vector<std::string>& labels) {
  if (configs.empty() || configs.size() != labels.size()) {
    throw std::invalid_argument("compare needs one label per config");
  }
  const ExperimentConfig& first = configs.front();
  for (const ExperimentConfig& config : configs) {
    if (!(config.schedule == first.schedule)) {
      throw std::invalid_argument("compared configs must share the schedule");
    }
    if (config.seed != first.seed) {
      throw std::invalid_argument("compared configs must share the seed");
    }
    if (!(config.models == first.models)) {
      throw std::invalid_argument(
          "compared configs must share the model profiles");
    }
  }

  std::vector<RunSummary> rows;
  for (size_t i = 0; i < configs.size(); ++i) {
    RunResult result = run_experiment(configs[i]);
    result.summary.label = labels[i];
    rows.push_back(result.summary);
  }
  return rows;
}

}  // namespace infersim
