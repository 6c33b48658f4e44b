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

#ifndef OLEV_CONFIG_HPP_
#define OLEV_CONFIG_HPP_

// Scenario configuration. JSON in, JSON out; unknown keys are rejected and
// every validation error names the offending field path.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "olev/auth.hpp"

namespace olev {

struct RoadConfig {
  std::uint32_t num_plates = 0;  // required
  double plate_length_m = 5.0;
  double auth_zone_fraction = 0.1;
  // Plates per road section; a fresh pseudonym is used per section.
  // 0 means the whole road is one section.
  std::uint32_t section_plates = 0;
  double charge_time_ms = 50.0;
};

struct FleetConfig {
  std::uint32_t count = 0;  // required
  // Per-vehicle values are taken round-robin from these lists.
  std::vector<double> speeds_mps{30.0};
  std::vector<double> battery_thresholds{0.9};
  std::vector<double> initial_battery{0.5};
  double energy_per_plate = 0.01;
  std::uint32_t pool_size = 16;
  double headway_s = 1.0;
};

struct CostsConfig {
  std::int64_t unit_cost = 1;
};

struct LatencyConfig {
  double dsrc_ms = 1.0;
  double wired_ms = 5.0;
};

struct TimingConfig {
  double t_hash_us = 0.76;
  double t_mul_ms = 0.78;
  double t_gamma_ms = 0.01;
  double t_dec_ms = 0.01;
  double t_enc_ms = 0.01;
};

struct CryptoConfig {
  std::uint32_t j = 5;
  std::uint32_t t = 3;
  std::uint32_t msk_epochs = 24;
  double epoch_duration_s = 3600.0;
  std::uint32_t chain_length = 64;
};

enum class PlateMode { kNone, kOverbill };
enum class ObuMode { kNone, kLogSuppression, kChainReplay, kPseudonymReuse };

struct PlateMisbehavior {
  std::uint32_t id = 0;
  PlateMode mode = PlateMode::kOverbill;
};

struct ObuMisbehavior {
  std::uint32_t id = 0;
  ObuMode mode = ObuMode::kLogSuppression;
};

struct MisbehaviorConfig {
  std::vector<PlateMisbehavior> plates;
  std::vector<ObuMisbehavior> obus;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Protocol protocol = Protocol::kDma;
  RoadConfig road;
  FleetConfig fleet;
  CostsConfig costs;
  LatencyConfig latencies;
  TimingConfig timing;
  CryptoConfig crypto;
  MisbehaviorConfig misbehavior;
};

std::string to_string(PlateMode m);
std::string to_string(ObuMode m);

// Throws Error(kConfig) with the field path in the message.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Canonical form: every field present, defaults filled in.
nlohmann::json to_json(const ScenarioConfig& c);

// serialize(parse(x)).
nlohmann::json normalize(const nlohmann::json& j);

// Cross-field checks (run by parse_config): ranges, targets in bounds and
// modes that fit the protocol.
void validate(const ScenarioConfig& c);

}  // namespace olev

#endif  // OLEV_CONFIG_HPP_
