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

#ifndef INFERSIM_PROTOCOL_HPP_
#define INFERSIM_PROTOCOL_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "infersim/request.hpp"

namespace infersim {

/// Binary framing, all integers big-endian:
///   request:  "SSIP" | version u8=1 | type u8=1 | token_len u16 | token |
///             name_len u16 | model name | batch u32 | payload_len u32 | payload
///   response: "SSIP" | version u8=1 | type u8=2 | status u8 | queue_ns u64 |
///             compute_ns u64 | payload_len u32 | payload
inline constexpr char kProtocolMagic[4] = {'S', 'S', 'I', 'P'};
inline constexpr uint8_t kProtocolVersion = 1;
inline constexpr uint8_t kFrameTypeRequest = 1;
inline constexpr uint8_t kFrameTypeResponse = 2;
inline constexpr size_t kMaxPayload = 16u << 20;

struct RequestFrame {
  std::string token;
  std::string model;
  uint32_t batch_size = 0;
  std::string payload;

  bool operator==(const RequestFrame&) const = default;
};

struct ResponseFrame {
  uint8_t status = 0;
  uint64_t queue_ns = 0;
  uint64_t compute_ns = 0;
  std::string payload;

  bool operator==(const ResponseFrame&) const = default;
};

using Frame = std::variant<RequestFrame, ResponseFrame>;

enum class DecodeStatus {
  kOk,
  kBadMagic,
  kBadVersion,
  kBadType,
  kBadStatus,
  kTruncated,
  kOversized,
};

std::string_view to_string(DecodeStatus status);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::kOk;
  Frame frame;
  /// Bytes consumed by a successful decode; 0 otherwise.
  size_t consumed = 0;
};

uint8_t outcome_to_status(Outcome outcome);
Outcome status_to_outcome(uint8_t status);

/// Throws std::invalid_argument when a field exceeds its length bound.
std::string encode(const RequestFrame& frame);
std::string encode(const ResponseFrame& frame);
std::string encode(const Frame& frame);

/// Never reads past the given bytes and never allocates more than a declared,
/// bounds-checked length. Arbitrary input yields kOk or a structured error.
DecodeResult decode(std::string_view bytes);

}  // namespace infersim

#endif  // INFERSIM_PROTOCOL_HPP_
