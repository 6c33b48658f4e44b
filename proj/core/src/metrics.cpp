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

#include "olev/metrics.hpp"

#include <cmath>
#include <string>

#include "olev/error.hpp"

namespace olev {

double entropy(const AnonymitySet& set) {
  double sum = 0.0;
  for (double p : set.probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidArgument, "probabilities must be >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                "probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  double h = 0.0;
  for (double p : set.probabilities) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double max_entropy(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty anonymity set");
  return std::log2(static_cast<double>(n));
}

OpCounts expected_dma_counts(Role role) {
  OpCounts c;
  if (role == Role::kObu) {
    c.hash = 3;
    c.xor_ops = 2;
  } else {
    c.hash = 6;
    c.xor_ops = 5;
  }
  return c;
}

Micros auth_compute_time(const OpCounts& counts, const CostModel& m) {
  return static_cast<double>(counts.hash) * m.t_hash +
         static_cast<double>(counts.enc) * Micros(m.t_enc) +
         static_cast<double>(counts.dec) * Micros(m.t_dec);
}

Millis revocation_time(const CostModel& m) {
  return 2.0 * m.t_gamma + 2.0 * m.t_mul + 2.0 * Millis(m.t_hash) +
         2.0 * m.t_dec;
}

MessageType parse_message_type(std::string_view kind) {
  if (kind == "charging_request") return MessageType::kChargingRequest;
  if (kind == "auth_request") return MessageType::kAuthRequest;
  if (kind == "auth_reply") return MessageType::kAuthReply;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown message kind: " + std::string(kind));
}

std::size_t message_size(Protocol protocol, MessageType type, std::size_t u) {
  constexpr std::size_t kTs = 6, kReq = 1, kDigest = 64;
  switch (type) {
    case MessageType::kChargingRequest:
      return protocol == Protocol::kDma ? kTs + kReq + kDigest + u
                                        : kTs + kReq + kDigest + kDigest;
    case MessageType::kAuthRequest:
      return protocol == Protocol::kDma ? u + 3 * kDigest : 2 * kDigest;
    case MessageType::kAuthReply:
      return protocol == Protocol::kDma ? 2 * 8 + 2 * kDigest : 33 + 32;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown message kind");
}

std::size_t message_size(Protocol protocol, std::string_view kind,
                         std::size_t u) {
  return message_size(protocol, parse_message_type(kind), u);
}

Millis auth_latency(Protocol protocol, const CostModel& m) {
  if (protocol == Protocol::kDma) {
    const OpCounts both = [] {
      OpCounts c = expected_dma_counts(Role::kObu);
      c += expected_dma_counts(Role::kCp);
      return c;
    }();
    return Millis(auth_compute_time(both, m)) + 2.0 * m.dsrc;
  }
  OpCounts obu;
  obu.dec = 1;
  OpCounts cspa;
  cspa.hash = 1;
  cspa.enc = 1;
  return Millis(auth_compute_time(obu, m)) +
         Millis(auth_compute_time(cspa, m)) + 2.0 * m.dsrc + 2.0 * m.wired;
}

Feasibility plate_feasibility(double length_m, double speed_mps, double f,
                              Protocol protocol, const CostModel& model) {
  if (!(length_m > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "plate length must be positive");
  }
  if (!(speed_mps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "speed must be positive");
  }
  if (!(f > 0.0 && f < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "auth fraction must be in (0, 1)");
  }
  Feasibility out;
  out.time_on_plate = Seconds(length_m / speed_mps);
  out.auth_budget = f * out.time_on_plate;
  out.auth_time = auth_latency(protocol, model);
  out.feasible = out.auth_time <= out.auth_budget;
  out.energy_time_remaining = out.time_on_plate - out.auth_time;
  return out;
}

}  // namespace olev
