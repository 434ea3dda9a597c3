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

#include "infersim/request.hpp"

namespace infersim {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kOk:
      return "ok";
    case Outcome::kRejectedAuth:
      return "rejected_auth";
    case Outcome::kRejectedRate:
      return "rejected_rate";
    case Outcome::kRejectedCapacity:
      return "rejected_capacity";
    case Outcome::kNoBackend:
      return "no_backend";
  }
  return "unknown";
}

bool RequestRecord::timestamps_ordered() const {
  return t_client_send <= t_gateway_in && t_gateway_in <= t_enqueue &&
         t_enqueue <= t_compute_start && t_compute_start <= t_compute_end &&
         t_compute_end <= t_client_recv;
}

}  // namespace infersim
