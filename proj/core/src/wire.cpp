// Copyright 2026 The olev-billing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "olev/wire.hpp"

#include "olev/error.hpp"

namespace olev {

namespace {

bool known_kind(std::uint8_t k) {
  switch (static_cast<MessageKind>(k)) {
    case MessageKind::kDmaAuthRequest:
    case MessageKind::kDmaAuthReply:
    case MessageKind::kPhaMember:
    case MessageKind::kPhaForward:
    case MessageKind::kPhaAuthStatus:
    case MessageKind::kChargeRequest:
    case MessageKind::kChargeAck:
    case MessageKind::kPhaChargeReply:
    case MessageKind::kBill:
      return true;
  }
  return false;
}

}  // namespace

Bytes WireFrame::encode() const {
  Bytes out;
  out.reserve(5 + payload.size());
  out.push_back(static_cast<std::uint8_t>(kind));
  append(out, encode_be(payload.size(), 4));
  append(out, payload);
  return out;
}

WireFrame WireFrame::decode(ByteView data) {
  if (data.size() < 5) {
    throw Error(ErrorCode::kMalformedInput, "frame shorter than its header");
  }
  if (!known_kind(data[0])) {
    throw Error(ErrorCode::kMalformedInput, "unknown message kind");
  }
  const std::uint64_t len = decode_be(data.subspan(1, 4));
  if (data.size() - 5 != len) {
    throw Error(ErrorCode::kMalformedInput, "frame length mismatch");
  }
  return WireFrame{static_cast<MessageKind>(data[0]), to_bytes(data.subspan(5))};
}

Bytes encode_timestamp(SimTime t) {
  return encode_be(static_cast<std::uint64_t>(t.count()) & 0xffffffffffffULL,
                   kTimestampSize);
}

SimTime decode_timestamp(ByteView six) {
  if (six.size() != kTimestampSize) {
    throw Error(ErrorCode::kMalformedInput, "timestamp must be 6 bytes");
  }
  return SimTime(static_cast<std::int64_t>(decode_be(six)));
}

std::string_view to_string(Protocol p) {
  return p == Protocol::kDma ? "DMA" : "PHA";
}

std::string_view to_string(AuthFailure f) {
  switch (f) {
    case AuthFailure::kMalformed: return "malformed";
    case AuthFailure::kTriesExhausted: return "tries_exhausted";
    case AuthFailure::kUnknownVehicle: return "unknown_vehicle";
    case AuthFailure::kC3Mismatch: return "c3_mismatch";
    case AuthFailure::kBadSignature: return "bad_signature";
    case AuthFailure::kC6Mismatch: return "c6_mismatch";
    case AuthFailure::kNotRegistered: return "not_registered";
    case AuthFailure::kChainMismatch: return "chain_mismatch";
    case AuthFailure::kReplay: return "replay";
    case AuthFailure::kChainExhausted: return "chain_exhausted";
    case AuthFailure::kLinkDown: return "link_down";
    case AuthFailure::kStaleTimestamp: return "stale_timestamp";
    case AuthFailure::kDecryptFailed: return "decrypt_failed";
    case AuthFailure::kTimeBudgetExceeded: return "time_budget_exceeded";
    case AuthFailure::kNoConsent: return "no_consent";
  }
  return "unknown";
}

}  // namespace olev
