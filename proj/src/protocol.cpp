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

#include "infersim/protocol.hpp"

#include <limits>
#include <stdexcept>

namespace infersim {

std::string_view to_string(DecodeStatus status) {
  switch (status) {
    case DecodeStatus::kOk:
      return "ok";
    case DecodeStatus::kBadMagic:
      return "bad_magic";
    case DecodeStatus::kBadVersion:
      return "bad_version";
    case DecodeStatus::kBadType:
      return "bad_type";
    case DecodeStatus::kBadStatus:
      return "bad_status";
    case DecodeStatus::kTruncated:
      return "truncated";
    case DecodeStatus::kOversized:
      return "oversized";
  }
  return "unknown";
}

uint8_t outcome_to_status(Outcome outcome) {
  switch (outcome) {
    case Outcome::kOk:
      return 0;
    case Outcome::kRejectedAuth:
      return 1;
    case Outcome::kRejectedRate:
      return 2;
    case Outcome::kRejectedCapacity:
      return 3;
    case Outcome::kNoBackend:
      return 4;
  }
  throw std::invalid_argument("unmapped outcome");
}

Outcome status_to_outcome(uint8_t status) {
  switch (status) {
    case 0:
      return Outcome::kOk;
    case 1:
      return Outcome::kRejectedAuth;
    case 2:
      return Outcome::kRejectedRate;
    case 3:
      return Outcome::kRejectedCapacity;
    case 4:
      return Outcome::kNoBackend;
    default:
      throw std::invalid_argument("unmapped status byte");
  }
}

namespace {

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v >> 24));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  put_u32(out, static_cast<uint32_t>(v >> 32));
  put_u32(out, static_cast<uint32_t>(v & 0xffffffffu));
}

void put_header(std::string& out, uint8_t type) {
  out.append(kProtocolMagic, sizeof(kProtocolMagic));
  out.push_back(static_cast<char>(kProtocolVersion));
  out.push_back(static_cast<char>(type));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  size_t position() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

  bool read_u8(uint8_t& v) {
    if (remaining() < 1) return false;
    v = static_cast<uint8_t>(bytes_[pos_++]);
    return true;
  }

  bool read_u16(uint16_t& v) {
    if (remaining() < 2) return false;
    v = static_cast<uint16_t>(static_cast<uint8_t>(bytes_[pos_]) << 8 |
                              static_cast<uint8_t>(bytes_[pos_ + 1]));
    pos_ += 2;
    return true;
  }

  bool read_u32(uint32_t& v) {
    if (remaining() < 4) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) {
      v = v << 8 | static_cast<uint8_t>(bytes_[pos_ + i]);
    }
    pos_ += 4;
    return true;
  }

  bool read_u64(uint64_t& v) {
    uint32_t hi, lo;
    if (remaining() < 8) return false;
    read_u32(hi);
    read_u32(lo);
    v = static_cast<uint64_t>(hi) << 32 | lo;
    return true;
  }

  bool read_bytes(size_t n, std::string& out) {
    if (remaining() < n) return false;
    out.assign(bytes_.substr(pos_, n));
    pos_ += n;
    return true;
  }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

DecodeResult fail(DecodeStatus status) {
  DecodeResult result;
  result.status = status;
  return result;
}

}  // namespace

std::string encode(const RequestFrame& frame) {
  if (frame.token.size() > std::numeric_limits<uint16_t>::max()) {
    throw std::invalid_argument("token exceeds 65535 bytes");
  }
  if (frame.model.size() > std::numeric_limits<uint16_t>::max()) {
    throw std::invalid_argument("model name exceeds 65535 bytes");
  }
  if (frame.payload.size() > kMaxPayload) {
    throw std::invalid_argument("payload exceeds protocol maximum");
  }
  std::string out;
  out.reserve(22 + frame.token.size() + frame.model.size() +
              frame.payload.size());
  put_header(out, kFrameTypeRequest);
  put_u16(out, static_cast<uint16_t>(frame.token.size()));
  out.append(frame.token);
  put_u16(out, static_cast<uint16_t>(frame.model.size()));
  out.append(frame.model);
  put_u32(out, frame.batch_size);
  put_u32(out, static_cast<uint32_t>(frame.payload.size()));
  out.append(frame.payload);
  return out;
}

std::string encode(const ResponseFrame& frame) {
  if (frame.status > 4) {
    throw std::invalid_argument("response status out of range");
  }
  if (frame.payload.size() > kMaxPayload) {
    throw std::invalid_argument("payload exceeds protocol maximum");
  }
  std::string out;
  out.reserve(27 + frame.payload.size());
  put_header(out, kFrameTypeResponse);
  out.push_back(static_cast<char>(frame.status));
  put_u64(out, frame.queue_ns);
  put_u64(out, frame.compute_ns);
  put_u32(out, static_cast<uint32_t>(frame.payload.size()));
  out.append(frame.payload);
  return out;
}

std::string encode(const Frame& frame) {
  if (std::holds_alternative<RequestFrame>(frame)) {
    return encode(std::get<RequestFrame>(frame));
  }
  return encode(std::get<ResponseFrame>(frame));
}

DecodeResult decode(std::string_view bytes) {
  for (size_t i = 0; i < sizeof(kProtocolMagic); ++i) {
    if (i >= bytes.size()) return fail(DecodeStatus::kTruncated);
    if (bytes[i] != kProtocolMagic[i]) return fail(DecodeStatus::kBadMagic);
  }

  Reader reader(bytes);
  std::string magic;
  reader.read_bytes(sizeof(kProtocolMagic), magic);

  uint8_t version;
  if (!reader.read_u8(version)) return fail(DecodeStatus::kTruncated);
  if (version != kProtocolVersion) return fail(DecodeStatus::kBadVersion);

  uint8_t type;
  if (!reader.read_u8(type)) return fail(DecodeStatus::kTruncated);

  DecodeResult result;
  if (type == kFrameTypeRequest) {
    RequestFrame frame;
    uint16_t token_len;
    if (!reader.read_u16(token_len)) return fail(DecodeStatus::kTruncated);
    if (!reader.read_bytes(token_len, frame.token)) {
      return fail(DecodeStatus::kTruncated);
    }
    uint16_t name_len;
    if (!reader.read_u16(name_len)) return fail(DecodeStatus::kTruncated);
    if (!reader.read_bytes(name_len, frame.model)) {
      return fail(DecodeStatus::kTruncated);
    }
    if (!reader.read_u32(frame.batch_size)) {
      return fail(DecodeStatus::kTruncated);
    }
    uint32_t payload_len;
    if (!reader.read_u32(payload_len)) return fail(DecodeStatus::kTruncated);
    if (payload_len > kMaxPayload) return fail(DecodeStatus::kOversized);
    if (!reader.read_bytes(payload_len, frame.payload)) {
      return fail(DecodeStatus::kTruncated);
    }
    result.frame = std::move(frame);
  } else if (type == kFrameTypeResponse) {
    ResponseFrame frame;
    if (!reader.read_u8(frame.status)) return fail(DecodeStatus::kTruncated);
    if (frame.status > 4) return fail(DecodeStatus::kBadStatus);
    if (!reader.read_u64(frame.queue_ns)) return fail(DecodeStatus::kTruncated);
    if (!reader.read_u64(frame.compute_ns)) {
      return fail(DecodeStatus::kTruncated);
    }
    uint32_t payload_len;
    if (!reader.read_u32(payload_len)) return fail(DecodeStatus::kTruncated);
    if (payload_len > kMaxPayload) return fail(DecodeStatus::kOversized);
    if (!reader.read_bytes(payload_len, frame.payload)) {
      return fail(DecodeStatus::kTruncated);
    }
    result.frame = std::move(frame);
  } else {
    return fail(DecodeStatus::kBadType);
  }

  result.status = DecodeStatus::kOk;
  result.consumed = reader.position();
  return result;
}

}  // namespace infersim
