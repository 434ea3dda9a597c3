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

#include "infersim/wallclock_runtime.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstring>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "infersim/autoscaler.hpp"
#include "infersim/exposition.hpp"
#include "infersim/fleet.hpp"
#include "infersim/gateway.hpp"
#include "infersim/loadgen.hpp"
#include "infersim/metrics.hpp"
#include "infersim/protocol.hpp"
#include "infersim/rng.hpp"

namespace infersim {

namespace {

struct Address {
  std::string host;
  uint16_t port = 0;
};

Address parse_address(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw std::invalid_argument("address must be host:port, got " + text);
  }
  Address address;
  address.host = text.substr(0, colon);
  int port = std::stoi(text.substr(colon + 1));
  if (port < 0 || port > 65535) {
    throw std::invalid_argument("port out of range in " + text);
  }
  address.port = static_cast<uint16_t>(port);
  return address;
}

bool read_exact(int fd, void* buf, size_t n) {
  char* out = static_cast<char*>(buf);
  size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r <= 0) return false;
    got += static_cast<size_t>(r);
  }
  return true;
}

bool write_all(int fd, const void* buf, size_t n) {
  const char* in = static_cast<const char*>(buf);
  size_t sent = 0;
  while (sent < n) {
    ssize_t w = ::send(fd, in + sent, n - sent, MSG_NOSIGNAL);
    if (w <= 0) return false;
    sent += static_cast<size_t>(w);
  }
  return true;
}

bool read_u16(int fd, uint16_t& v) {
  uint8_t b[2];
  if (!read_exact(fd, b, 2)) return false;
  v = static_cast<uint16_t>(b[0] << 8 | b[1]);
  return true;
}

bool read_u32(int fd, uint32_t& v) {
  uint8_t b[4];
  if (!read_exact(fd, b, 4)) return false;
  v = static_cast<uint32_t>(b[0]) << 24 | static_cast<uint32_t>(b[1]) << 16 |
      static_cast<uint32_t>(b[2]) << 8 | static_cast<uint32_t>(b[3]);
  return true;
}

bool read_sized(int fd, size_t n, std::string& out) {
  out.resize(n);
  return n == 0 || read_exact(fd, out.data(), n);
}

std::optional<RequestFrame> read_request_frame(int fd) {
  uint8_t header[6];
  if (!read_exact(fd, header, sizeof(header))) return std::nullopt;
  if (std::memcmp(header, kProtocolMagic, 4) != 0) return std::nullopt;
  if (header[4] != kProtocolVersion || header[5] != kFrameTypeRequest) {
    return std::nullopt;
  }
  RequestFrame frame;
  uint16_t token_len;
  if (!read_u16(fd, token_len)) return std::nullopt;
  if (!read_sized(fd, token_len, frame.token)) return std::nullopt;
  uint16_t name_len;
  if (!read_u16(fd, name_len)) return std::nullopt;
  if (!read_sized(fd, name_len, frame.model)) return std::nullopt;
  if (!read_u32(fd, frame.batch_size)) return std::nullopt;
  uint32_t payload_len;
  if (!read_u32(fd, payload_len)) return std::nullopt;
  if (payload_len > kMaxPayload) return std::nullopt;
  if (!read_sized(fd, payload_len, frame.payload)) return std::nullopt;
  return frame;
}

std::optional<ResponseFrame> read_response_frame(int fd) {
  uint8_t header[6];
  if (!read_exact(fd, header, sizeof(header))) return std::nullopt;
  if (std::memcmp(header, kProtocolMagic, 4) != 0) return std::nullopt;
  if (header[4] != kProtocolVersion || header[5] != kFrameTypeResponse) {
    return std::nullopt;
  }
  uint8_t status;
  if (!read_exact(fd, &status, 1)) return std::nullopt;
  if (status > 4) return std::nullopt;
  ResponseFrame frame;
  frame.status = status;
  uint32_t hi, lo;
  if (!read_u32(fd, hi) || !read_u32(fd, lo)) return std::nullopt;
  frame.queue_ns = static_cast<uint64_t>(hi) << 32 | lo;
  if (!read_u32(fd, hi) || !read_u32(fd, lo)) return std::nullopt;
  frame.compute_ns = static_cast<uint64_t>(hi) << 32 | lo;
  uint32_t payload_len;
  if (!read_u32(fd, payload_len)) return std::nullopt;
  if (payload_len > kMaxPayload) return std::nullopt;
  if (!read_sized(fd, payload_len, frame.payload)) return std::nullopt;
  return frame;
}

TimePoint next_phase_boundary(const PhaseSchedule& schedule, TimePoint now) {
  TimePoint boundary = kRunStart;
  for (const Phase& phase : schedule.phases) {
    boundary += phase.duration;
    if (boundary > now) return boundary;
  }
  return boundary;
}

class Runtime {
 public:
  explicit Runtime(const ExperimentConfig& config)
      : config_(config),
        clock_(config.time_scale),
        metrics_(metric_span(config), metric_span(config)),
        fleet_(config.backend),
        gateway_(config.gateway, fleet_, model_map(config), metrics_),
        rng_(config.seed),
        schedule_end_(kRunStart + total_duration(config.schedule)) {
    if (config_.autoscaler) {
      autoscaler_.emplace(*config_.autoscaler, fleet_, metrics_);
    }
    if (config_.gateway.external_metric_limit) {
      gateway_.set_external_metric_source([this] {
        std::optional<Duration> avg = metrics_.pooled_queue_average(
            fleet_.metric_source_ids(), clock_.now(), metric_span(config_));
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

  void open_listener();
  void accept_loop();
  void handle_connection(int fd);
  ResponseFrame serve_request(const RequestFrame& frame);
  void engine_loop();
  void autoscaler_loop();
  void sampler_loop();
  void client_loop(uint32_t client);
  void take_sample(TimePoint now, TimePoint prev);
  void update_gauges(TimePoint now, TimePoint prev);

  // Advances the fleet under mu_ and fulfills the waiting connections; every
  // thread that moves virtual time forward must route completions through
  // here so none are dropped.
  void deliver_completions_locked(TimePoint now);

  const ExperimentConfig& config_;
  ScaledWallClock clock_;
  MetricsRegistry metrics_;
  Fleet fleet_;
  Gateway gateway_;
  std::optional<Autoscaler> autoscaler_;
  Rng rng_;
  TimePoint schedule_end_;

  std::mutex mu_;
  std::condition_variable engine_cv_;
  bool engine_stop_ = false;
  TimePoint engine_end_ = kRunStart;
  uint64_t next_request_id_ = 1;
  std::map<uint64_t, std::promise<RequestRecord>> waiters_;
  std::vector<RequestRecord> records_;
  std::vector<TimeseriesSample> samples_;
  TimePoint last_sample_ = kRunStart;

  std::atomic<bool> stop_accept_{false};
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::mutex conn_mu_;
  std::vector<std::thread> conn_threads_;
  std::set<int> conn_fds_;
};

void Runtime::open_listener() {
  Address address = parse_address(config_.gateway.listen_address);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(address.port);
  if (::inet_pton(AF_INET, address.host.c_str(), &addr.sin_addr) != 1) {
    throw std::runtime_error("cannot parse listen host " + address.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) !=
      0) {
    throw std::runtime_error("bind failed on " + config_.gateway.listen_address);
  }
  if (::listen(listen_fd_, 64) != 0) {
    throw std::runtime_error("listen failed");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

void Runtime::accept_loop() {
  while (!stop_accept_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    int ready = ::poll(&pfd, 1, 50);
    if (ready <= 0) continue;
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard<std::mutex> lock(conn_mu_);
    conn_fds_.insert(fd);
    conn_threads_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void Runtime::handle_connection(int fd) {
  for (;;) {
    std::optional<RequestFrame> frame = read_request_frame(fd);
    if (!frame) break;
    ResponseFrame response = serve_request(*frame);
    std::string bytes = encode(response);
    if (!write_all(fd, bytes.data(), bytes.size())) break;
  }
  {
    std::lock_guard<std::mutex> lock(conn_mu_);
    conn_fds_.erase(fd);
  }
  ::close(fd);
}

ResponseFrame Runtime::serve_request(const RequestFrame& frame) {
  ResponseFrame response;
  if (frame.batch_size == 0) {
    response.status = outcome_to_status(Outcome::kNoBackend);
    return response;
  }

  std::future<RequestRecord> future;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (engine_stop_) {
      response.status = outcome_to_status(Outcome::kNoBackend);
      return response;
    }
    TimePoint now = clock_.now();
    InferenceRequest request;
    request.request_id = next_request_id_++;
    request.model = frame.model;
    request.batch_size = frame.batch_size;
    request.token = frame.token;
    request.payload_size = frame.payload.size();

    RouteResult routed = gateway_.route(request, now, now, rng_);
    if (routed.outcome != Outcome::kOk) {
      RequestRecord record = std::move(*routed.rejection);
      record.t_client_recv = clock_.now();
      metrics_.record_request(record);
      records_.push_back(std::move(record));
      response.status = outcome_to_status(routed.outcome);
      return response;
    }
    std::promise<RequestRecord> promise;
    future = promise.get_future();
    waiters_.emplace(request.request_id, std::move(promise));
    engine_cv_.notify_all();
  }

  RequestRecord record = future.get();
  response.status = outcome_to_status(Outcome::kOk);
  response.queue_ns = static_cast<uint64_t>(record.queue_time().count());
  response.compute_ns = static_cast<uint64_t>(record.compute_time().count());
  return response;
}

void Runtime::deliver_completions_locked(TimePoint now) {
  std::vector<RequestRecord> done = fleet_.advance_all(now);
  for (RequestRecord& record : done) {
    record.t_client_recv = now;
    metrics_.record_request(record);
    gateway_.on_response_delivered();
    auto waiter = waiters_.find(record.request_id);
    records_.push_back(record);
    if (waiter != waiters_.end()) {
      waiter->second.set_value(std::move(record));
      waiters_.erase(waiter);
    }
  }
}

void Runtime::engine_loop() {
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    TimePoint now = clock_.now();
    deliver_completions_locked(now);
    std::optional<TimePoint> next = fleet_.next_event_time();
    if (engine_stop_ && !next && waiters_.empty()) {
      engine_end_ = now;
      return;
    }
    if (next) {
      engine_cv_.wait_until(lock, clock_.real_deadline(*next));
    } else {
      engine_cv_.wait_for(lock, std::chrono::milliseconds(10));
    }
  }
}

void Runtime::autoscaler_loop() {
  Duration poll = autoscaler_->config().poll_interval;
  for (TimePoint t = kRunStart + poll; t <= schedule_end_; t += poll) {
    clock_.sleep_until(t);
    std::lock_guard<std::mutex> lock(mu_);
    deliver_completions_locked(t);
    autoscaler_->reconcile(t);
    engine_cv_.notify_all();
  }
}

void Runtime::update_gauges(TimePoint now, TimePoint prev) {
  metrics_.set_gauge("ready_replicas", {}, fleet_.ready_count());
  metrics_.set_gauge("starting_replicas", {}, fleet_.starting_count());
  metrics_.set_gauge("draining_replicas", {}, fleet_.draining_count());
  metrics_.set_gauge("client_count", {},
                     clients_at(config_.schedule, now));
  metrics_.set_gauge("in_flight_requests", {},
                     static_cast<double>(gateway_.active_connections()));
  if (now > prev) {
    for (const BackendInstance* instance : fleet_.all_instances()) {
      metrics_.set_gauge("gpu_utilization", {{"backend", instance->id()}},
                         to_seconds(instance->busy_in(prev, now)) /
                             to_seconds(now - prev));
    }
    std::optional<Duration> qavg =
        metrics_.pooled_queue_average(fleet_.all_ids(), now, now - prev);
    if (qavg) {
      metrics_.set_gauge("queue_latency_seconds", {}, to_seconds(*qavg));
    }
    std::optional<Duration> p50 = metrics_.e2e_quantile(now, now - prev, 0.5);
    if (p50) {
      metrics_.set_gauge("end_to_end_latency_p50_seconds", {},
                         to_seconds(*p50));
    }
  }
}

void Runtime::take_sample(TimePoint now, TimePoint prev) {
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
  last_sample_ = now;
}

void Runtime::sampler_loop() {
  for (int64_t s = 1;; ++s) {
    TimePoint t = kRunStart + std::chrono::seconds(s);
    bool final_sample = false;
    if (t >= schedule_end_) {
      t = schedule_end_;
      final_sample = true;
    }
    clock_.sleep_until(t);
    {
      std::lock_guard<std::mutex> lock(mu_);
      TimePoint prev = last_sample_;
      deliver_completions_locked(t);
      take_sample(t, prev);
      update_gauges(t, prev);
      engine_cv_.notify_all();
    }
    if (final_sample) return;
  }
}

void Runtime::client_loop(uint32_t client) {
  const ClientProfile& profile = config_.schedule.client;
  int fd = -1;
  auto disconnect = [&] {
    if (fd >= 0) {
      ::close(fd);
      fd = -1;
    }
  };

  while (true) {
    TimePoint now = clock_.now();
    if (now >= schedule_end_) break;
    if (clients_at(config_.schedule, now) <= client) {
      TimePoint boundary =
          std::min(next_phase_boundary(config_.schedule, now), schedule_end_);
      clock_.sleep_until(boundary);
      continue;
    }

    if (fd < 0) {
      fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) break;
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_port = htons(port_);
      ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) !=
          0) {
        disconnect();
        clock_.sleep_for(from_millis(10.0));
        continue;
      }
    }

    RequestFrame frame;
    frame.token = profile.token;
    frame.model = profile.model;
    frame.batch_size = profile.batch_size;
    frame.payload.assign(profile.payload_size, '\0');
    std::string bytes = encode(frame);
    if (!write_all(fd, bytes.data(), bytes.size())) {
      disconnect();
      continue;
    }
    std::optional<ResponseFrame> response = read_response_frame(fd);
    if (!response) {
      disconnect();
      continue;
    }
    Duration wait = response->status == 0
                        ? profile.think_time
                        : retry_backoff(profile.think_time);
    if (wait > Duration::zero()) clock_.sleep_for(wait);
  }
  disconnect();
}

RunResult Runtime::run() {
  open_listener();

  {
    std::lock_guard<std::mutex> lock(mu_);
    uint32_t replicas = initial_replicas(config_);
    for (uint32_t i = 0; i < replicas; ++i) fleet_.spawn_ready(clock_.now());
    take_sample(clock_.now(), clock_.now());
    update_gauges(clock_.now(), clock_.now());
  }

  httplib::Server metrics_server;
  std::thread metrics_thread;
  if (!config_.metrics_address.empty()) {
    metrics_server.Get("/metrics", [this](const httplib::Request&,
                                          httplib::Response& res) {
      res.set_content(render_prometheus(metrics_), "text/plain; version=0.0.4");
    });
    Address address = parse_address(config_.metrics_address);
    int port = address.port == 0
                   ? metrics_server.bind_to_any_port(address.host)
                   : (metrics_server.bind_to_port(address.host, address.port)
                          ? address.port
                          : -1);
    if (port < 0) throw std::runtime_error("metrics endpoint bind failed");
    metrics_thread = std::thread([&metrics_server] {
      metrics_server.listen_after_bind();
    });
  }

  std::thread engine([this] { engine_loop(); });
  std::thread accepter([this] { accept_loop(); });
  std::thread scaler;
  if (autoscaler_) {
    scaler = std::thread([this] { autoscaler_loop(); });
  }
  std::thread sampler([this] { sampler_loop(); });

  uint32_t max_clients = 0;
  for (const Phase& phase : config_.schedule.phases) {
    max_clients = std::max(max_clients, phase.client_count);
  }
  std::vector<std::thread> clients;
  clients.reserve(max_clients);
  for (uint32_t c = 0; c < max_clients; ++c) {
    clients.emplace_back([this, c] { client_loop(c); });
  }

  for (std::thread& t : clients) t.join();
  if (scaler.joinable()) scaler.join();
  sampler.join();

  {
    std::lock_guard<std::mutex> lock(mu_);
    engine_stop_ = true;
    engine_cv_.notify_all();
  }
  engine.join();

  stop_accept_.store(true);
  accepter.join();
  ::close(listen_fd_);
  {
    // Unblock connections that sit in a read; their threads erase and close
    // the fds themselves. The accepter is gone, so iterating the thread list
    // without the lock afterwards is safe.
    std::lock_guard<std::mutex> lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (std::thread& t : conn_threads_) t.join();
  if (metrics_thread.joinable()) {
    metrics_server.stop();
    metrics_thread.join();
  }

  RunResult result;
  {
    std::lock_guard<std::mutex> lock(mu_);
    TimePoint run_end = std::max(engine_end_, schedule_end_);
    if (run_end > last_sample_) take_sample(run_end, last_sample_);
    result.summary = summarize_run(config_, records_, fleet_,
                                   gateway_.peak_active(), run_end);
    result.samples = std::move(samples_);
    result.backend_ids = fleet_.all_ids();
    result.records = std::move(records_);
    result.requests_sent = next_request_id_ - 1;
    result.backend_accepted = fleet_.total_accepted();
    result.backend_served = fleet_.total_served();
  }
  return result;
}

}  // namespace

RunResult run_wallclock(const ExperimentConfig& config) {
  validate(config);
  if (config.mode != RunMode::kWallClock) {
    throw std::invalid_argument(
        "run_wallclock requires a wallclock-mode config");
  }
  Runtime runtime(config);
  return runtime.run();
}

}  // namespace infersim
