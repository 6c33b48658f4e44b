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

#ifndef OLEV_METRICS_HPP_
#define OLEV_METRICS_HPP_

// Analytic model: anonymity entropy, operation and message accounting, the
// timing model and plate-length feasibility. All timing flows through
// CostModel; nothing here reads a clock.

#include <chrono>
#include <cstddef>
#include <string_view>
#include <vector>

#include "olev/auth.hpp"
#include "olev/op_meter.hpp"

namespace olev {

using Millis = std::chrono::duration<double, std::milli>;
using Micros = std::chrono::duration<double, std::micro>;
using Seconds = std::chrono::duration<double>;

struct AnonymitySet {
  std::vector<double> probabilities;
};

inline constexpr double kDistributionTolerance = 1e-9;

// Shannon entropy in bits; p = 0 terms contribute 0. Throws kInvalidArgument
// for a negative probability or a sum off 1 by more than 1e-9.
double entropy(const AnonymitySet& set);

// log2 n. Throws kInvalidArgument for n = 0.
double max_entropy(std::size_t n);

enum class Role { kObu, kCp };

// OBU {3 hash, 2 xor}; CP {6 hash, 5 xor}.
OpCounts expected_dma_counts(Role role);

struct CostModel {
  Micros t_hash{0.76};
  Millis t_mul{0.78};
  Millis t_gamma{0.01};
  Millis t_dec{0.01};
  Millis t_enc{0.01};
  Millis dsrc{1.0};
  Millis wired{5.0};
  std::size_t timestamp_size = 6;
  std::size_t request_size = 1;
  std::size_t digest_size = 64;
  std::size_t pseudonym_size = 104;
};

// hash x t_hash + enc x t_enc + dec x t_dec; XOR time is ignored.
Micros auth_compute_time(const OpCounts& counts, const CostModel& model);

// 2 t_gamma + 2 t_mul + 2 t_hash + 2 t_dec.
Millis revocation_time(const CostModel& model);

enum class MessageType { kChargingRequest, kAuthRequest, kAuthReply };

// Throws kInvalidArgument for an unknown kind name.
MessageType parse_message_type(std::string_view kind);

// Charging request: DMA 71 + u (timestamp 6, req 1, MAC 64, pseudonym u);
// PHA 135 (timestamp 6, req 1, X_OBU 64, MAC 64).
// DMA auth request u + 192, reply 144; PHA auth request (member, X_OBU) 128,
// reply (sealed session key) 65.
std::size_t message_size(Protocol protocol, MessageType type, std::size_t u);
std::size_t message_size(Protocol protocol, std::string_view kind, std::size_t u);

struct Feasibility {
  Millis time_on_plate{0};
  Millis auth_budget{0};
  Millis auth_time{0};
  bool feasible = false;
  Millis energy_time_remaining{0};
};

// Authentication latency of one plate visit:
//   DMA  OBU + CP compute + 2 dsrc
//   PHA  OBU (1 dec) + CSPA (1 hash, 1 enc) + 2 dsrc + 2 wired
Millis auth_latency(Protocol protocol, const CostModel& model);

// time_on_plate = length / speed; auth_budget = f x time_on_plate;
// feasible iff auth_time <= auth_budget. Throws kInvalidArgument for a
// non-positive length or speed, or f outside (0, 1).
Feasibility plate_feasibility(double length_m, double speed_mps, double f,
                              Protocol protocol, const CostModel& model);

}  // namespace olev

#endif  // OLEV_METRICS_HPP_
