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

#include "infersim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace infersim {

SlidingWindow::SlidingWindow(Duration span, size_t capacity)
    : span_(span), capacity_(capacity) {
  if (span <= Duration::zero()) {
    throw std::invalid_argument("sliding window span must be positive");
  }
  if (capacity == 0) {
    throw std::invalid_argument("sliding window capacity must be positive");
  }
}

void SlidingWindow::push(TimePoint t, double value) {
  while (!samples_.empty() && samples_.front().first <= t - span_) {
    samples_.pop_front();
  }
  if (samples_.size() == capacity_) {
    samples_.pop_front();
  }
  samples_.emplace_back(t, value);
}

std::optional<double> SlidingWindow::average(TimePoint now,
                                             Duration window) const {
  auto [sum, count] = sum_count(now, window);
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::pair<double, size_t> SlidingWindow::sum_count(TimePoint now,
                                                   Duration window) const {
  if (window <= Duration::zero()) {
    throw std::invalid_argument("window must be positive");
  }
  double sum = 0.0;
  size_t count = 0;
  for (const auto& [t, v] : samples_) {
    if (t > now - window && t <= now) {
      sum += v;
      ++count;
    }
  }
  return {sum, count};
}

std::vector<double> SlidingWindow::values_in(TimePoint now,
                                             Duration window) const {
  if (window <= Duration::zero()) {
    throw std::invalid_argument("window must be positive");
  }
  std::vector<double> out;
  for (const auto& [t, v] : samples_) {
    if (t > now - window && t <= now) out.push_back(v);
  }
  return out;
}

std::optional<double> window_average(const SlidingWindow& series, TimePoint now,
                                     Duration window) {
  return series.average(now, window);
}

Labels sorted_labels(Labels labels) {
  std::sort(labels.begin(), labels.end());
  return labels;
}

MetricsRegistry::MetricsRegistry(Duration queue_window_span,
                                 Duration e2e_window_span,
                                 size_t window_capacity)
    : queue_window_span_(queue_window_span),
      e2e_window_span_(e2e_window_span),
      window_capacity_(window_capacity),
      e2e_(e2e_window_span, window_capacity) {}

void MetricsRegistry::increment_counter(const std::string& name,
                                        const Labels& labels, uint64_t delta) {
  std::lock_guard<std::mutex> lock(mu_);
  counters_[{name, sorted_labels(labels)}] += delta;
}

void MetricsRegistry::set_gauge(const std::string& name, const Labels& labels,
                                double value) {
  std::lock_guard<std::mutex> lock(mu_);
  gauges_[{name, sorted_labels(labels)}] = value;
}

void MetricsRegistry::record_request(const RequestRecord& record) {
  if (record.outcome == Outcome::kOk && !record.timestamps_ordered()) {
    throw std::logic_error("ok record with out-of-order timestamps: id " +
                           std::to_string(record.request_id));
  }
  std::lock_guard<std::mutex> lock(mu_);
  Labels labels{{"model", record.model},
                {"outcome", std::string(to_string(record.outcome))}};
  counters_[{"requests_total", sorted_labels(std::move(labels))}] += 1;
  if (record.outcome != Outcome::kOk) return;

  auto [it, inserted] = queue_by_backend_.try_emplace(
      record.backend_id, queue_window_span_, window_capacity_);
  it->second.push(record.t_compute_end,
                  static_cast<double>(record.queue_time().count()));
  e2e_.push(record.t_client_recv,
            static_cast<double>(record.total_time().count()));
}

uint64_t MetricsRegistry::counter_value(const std::string& name,
                                        const Labels& labels) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = counters_.find({name, sorted_labels(labels)});
  return it == counters_.end() ? 0 : it->second;
}

std::optional<double> MetricsRegistry::gauge_value(const std::string& name,
                                                   const Labels& labels) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = gauges_.find({name, sorted_labels(labels)});
  if (it == gauges_.end()) return std::nullopt;
  return it->second;
}

std::optional<Duration> MetricsRegistry::pooled_queue_average(
    const std::vector<std::string>& backend_ids, TimePoint now,
    Duration window) const {
  std::lock_guard<std::mutex> lock(mu_);
  double sum = 0.0;
  size_t count = 0;
  for (const auto& id : backend_ids) {
    auto it = queue_by_backend_.find(id);
    if (it == queue_by_backend_.end()) continue;
    auto [s, c] = it->second.sum_count(now, window);
    sum += s;
    count += c;
  }
  if (count == 0) return std::nullopt;
  return Duration(static_cast<Duration::rep>(
      std::llround(sum / static_cast<double>(count))));
}

std::optional<Duration> MetricsRegistry::queue_average(
    const std::string& backend_id, TimePoint now, Duration window) const {
  return pooled_queue_average({backend_id}, now, window);
}

std::optional<Duration> MetricsRegistry::e2e_quantile(TimePoint now,
                                                      Duration window,
                                                      double q) const {
  if (q < 0.0 || q > 1.0) {
    throw std::invalid_argument("quantile must be in [0, 1]");
  }
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<double> values = e2e_.values_in(now, window);
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  size_t rank = static_cast<size_t>(
      std::ceil(q * static_cast<double>(values.size())));
  if (rank > 0) --rank;
  return Duration(static_cast<Duration::rep>(std::llround(values[rank])));
}

std::vector<CounterSample> MetricsRegistry::counters() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<CounterSample> out;
  out.reserve(counters_.size());
  for (const auto& [key, value] : counters_) {
    out.push_back({key.first, key.second, value});
  }
  return out;
}

std::vector<GaugeSample> MetricsRegistry::gauges() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<GaugeSample> out;
  out.reserve(gauges_.size());
  for (const auto& [key, value] : gauges_) {
    out.push_back({key.first, key.second, value});
  }
  return out;
}

}  // namespace infersim
