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

#include "olev/bytes.hpp"

#include "olev/error.hpp"

namespace olev {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::kMalformedInput, "hex string has odd length");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::kMalformedInput, "invalid hex character");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Bytes encode_be(std::uint64_t value, std::size_t width) {
  Bytes out(width, 0);
  for (std::size_t i = 0; i < width && i < 8; ++i) {
    out[width - 1 - i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
  return out;
}

std::uint64_t decode_be(ByteView data) {
  std::uint64_t v = 0;
  for (std::uint8_t b : data) v = (v << 8) | b;
  return v;
}

Bytes xor_equal(ByteView a, ByteView b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "xor of unequal lengths");
  }
  Bytes out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMalformedInput: return "malformed_input";
    case ErrorCode::kZeroScalar: return "zero_scalar";
    case ErrorCode::kBelowThreshold: return "below_threshold";
    case ErrorCode::kDuplicateIndex: return "duplicate_index";
    case ErrorCode::kDuplicateVehicle: return "duplicate_vehicle";
    case ErrorCode::kMissingWarrant: return "missing_warrant";
    case ErrorCode::kBadSignature: return "bad_signature";
    case ErrorCode::kInconsistentDecryption: return "inconsistent_decryption";
    case ErrorCode::kUnknownPseudonym: return "unknown_pseudonym";
    case ErrorCode::kNoLiveNode: return "no_live_node";
    case ErrorCode::kNotRegistered: return "not_registered";
    case ErrorCode::kInvalidCertificate: return "invalid_certificate";
    case ErrorCode::kBadPassword: return "bad_password";
    case ErrorCode::kNoSessionKey: return "no_session_key";
    case ErrorCode::kUnknownTarget: return "unknown_target";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace olev
