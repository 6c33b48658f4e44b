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

#ifndef OLEV_WIRE_HPP_
#define OLEV_WIRE_HPP_

// Binary message framing shared by the OBU, the plates and the CSPA.
//
// Every message travels as  kind(1) || length(4, big-endian) || payload.
//
// Charging-request plaintext frames (encrypted under the session key with
// stream_xcrypt, nonce = ID_cp, before transmission; same length after):
//   DMA  timestamp(6) || req(1) || PS(104)    || h_{K_V}(alpha)(64) = 175 B
//        alpha = timestamp || req || PS
//   PHA  timestamp(6) || req(1) || X_OBU(64)  || h_{K_V}(beta)(64)  = 135 B
//        beta  = timestamp || req || X_OBU
// Timestamps are the low 48 bits of simulated microseconds, big-endian.

#include <cstdint>
#include <optional>

#include "olev/auth.hpp"
#include "olev/bytes.hpp"
#include "olev/crypto.hpp"

namespace olev {

enum class MessageKind : std::uint8_t {
  kDmaAuthRequest = 0x10,
  kDmaAuthReply = 0x11,
  kPhaMember = 0x20,
  kPhaForward = 0x21,
  kPhaAuthStatus = 0x22,
  kChargeRequest = 0x30,
  kChargeAck = 0x31,
  kPhaChargeReply = 0x32,
  kBill = 0x40,
};

struct WireFrame {
  MessageKind kind{};
  Bytes payload;

  Bytes encode() const;
  // Throws kMalformedInput on truncation, trailing bytes or unknown kind.
  static WireFrame decode(ByteView data);

  friend bool operator==(const WireFrame&, const WireFrame&) = default;
};

inline constexpr std::size_t kTimestampSize = 6;
inline constexpr std::size_t kRequestCodeSize = 1;
inline constexpr std::uint8_t kChargingRequestCode = 0x01;
inline constexpr std::uint8_t kAckCode = 0x06;

Bytes encode_timestamp(SimTime t);
SimTime decode_timestamp(ByteView six);

inline constexpr std::size_t kPhaChargeFrameSize =
    kTimestampSize + kRequestCodeSize + kDigestSize + kDigestSize;

}  // namespace olev

#endif  // OLEV_WIRE_HPP_
