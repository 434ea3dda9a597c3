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

#ifndef INFERSIM_METRICS_HPP_
#define INFERSIM_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "infersim/request.hpp"
#include "infersim/time.hpp"

namespace infersim {

/// Bounded time-series buffer. Samples older than `span` relative to the
/// newest push are evicted, as is the oldest sample when `capacity` would be
/// exceeded. Queries see samples with timestamp in (now - window, now].
class SlidingWindow {
 public:
  SlidingWindow(Duration span, size_t capacity);

  void push(TimePoint t, double value);

  /// Mean of samples in (now - window, now]; absent when empty.
  std::optional<double> average(TimePoint now, Duration window) const;

  /// Sum and count of samples in (now - window, now], for pooled means.
  std::pair<double, size_t> sum_count(TimePoint now, Duration window) const;

  std::vector<double> values_in(TimePoint now, Duration window) const;

  size_t size() const { return samples_.size(); }
  Duration span() const { return span_; }

 private:
  Duration span_;
  size_t capacity_;
  std::deque<std::pair<TimePoint, double>> samples_;
};

std::optional<double> window_average(const SlidingWindow& series, TimePoint now,
                                     Duration window);

/// Label set for a metric sample. Keys are kept sorted so equal label sets
/// compare equal regardless of insertion order.
using Labels = std::vector<std::pair<std::string, std::string>>;

Labels sorted_labels(Labels labels);

struct CounterSample {
  std::string name;
  Labels labels;
  uint64_t value = 0;
};

struct GaugeSample {
  std::string name;
  Labels labels;
  double value = 0.0;
};

/// Shared metrics sink. Thread-safe: wall-clock mode updates it from many
/// connection handlers concurrently.
class MetricsRegistry {
 public:
  static constexpr size_t kDefaultWindowCapacity = 1 << 16;

  explicit MetricsRegistry(Duration queue_window_span = from_seconds(30.0),
                           Duration e2e_window_span = from_seconds(30.0),
                           size_t window_capacity = kDefaultWindowCapacity);

  void increment_counter(const std::string& name, const Labels& labels,
                         uint64_t delta = 1);
  void set_gauge(const std::string& name, const Labels& labels, double value);

  /// Ingests one finished request: bumps requests_total{model,outcome} and,
  /// for ok outcomes, appends the queue wait to the backend's series (stamped
  /// at compute end) and the end-to-end latency to the global series (stamped
  /// at client receive). Throws std::logic_error when an ok record violates
  /// timestamp ordering.
  void record_request(const RequestRecord& record);

  uint64_t counter_value(const std::string& name, const Labels& labels) const;
  std::optional<double> gauge_value(const std::string& name,
                                    const Labels& labels) const;

  /// Pooled mean queue wait over the given backends' samples in
  /// (now - window, now]; absent when no backend has a sample there.
  std::optional<Duration> pooled_queue_average(
      const std::vector<std::string>& backend_ids, TimePoint now,
      Duration window) const;

  std::optional<Duration> queue_average(const std::string& backend_id,
                                        TimePoint now, Duration window) const;

  std::optional<Duration> e2e_quantile(TimePoint now, Duration window,
                                       double q) const;

  std::vector<CounterSample> counters() const;
  std::vector<GaugeSample> gauges() const;

 private:
  using MetricKey = std::pair<std::string, Labels>;

  mutable std::mutex mu_;
  Duration queue_window_span_;
  Duration e2e_window_span_;
  size_t window_capacity_;
  std::map<MetricKey, uint64_t> counters_;
  std::map<MetricKey, double> gauges_;
  std::map<std::string, SlidingWindow> queue_by_backend_;
  SlidingWindow e2e_;
};

}  // namespace infersim

#endif  // INFERSIM_METRICS_HPP_
