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

#ifndef INFERSIM_REQUEST_HPP_
#define INFERSIM_REQUEST_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "infersim/time.hpp"

namespace infersim {

enum class Outcome {
  kOk,
  kRejectedAuth,
  kRejectedRate,
  kRejectedCapacity,
  kNoBackend,
};

std::string_view to_string(Outcome outcome);

/// One client inference request. request_id is unique within a run.
struct InferenceRequest {
  uint64_t request_id = 0;
  std::string model;
  uint32_t batch_size = 1;
  std::string token;
  uint64_t payload_size = 0;
};

/// Full timing breakdown of one request. For ok outcomes the timestamps are
/// ordered send <= gateway_in <= enqueue <= compute_start <= compute_end <=
/// recv, and total = network + queue + compute holds exactly in integer
/// nanoseconds (network is everything outside the queue and the GPU).
struct RequestRecord {
  uint64_t request_id = 0;
  std::string model;
  std::string backend_id;
  Outcome outcome = Outcome::kOk;
  TimePoint t_client_send{};
  TimePoint t_gateway_in{};
  TimePoint t_enqueue{};
  TimePoint t_compute_start{};
  TimePoint t_compute_end{};
  TimePoint t_client_recv{};

  Duration total_time() const { return t_client_recv - t_client_send; }
  Duration queue_time() const { return t_compute_start - t_enqueue; }
  Duration compute_time() const { return t_compute_end - t_compute_start; }
  Duration network_time() const { return total_time() - queue_time() - compute_time(); }

  /// True when the ok-outcome timestamp chain is non-decreasing.
  bool timestamps_ordered() const;
};

}  // namespace infersim

#endif  // INFERSIM_REQUEST_HPP_
