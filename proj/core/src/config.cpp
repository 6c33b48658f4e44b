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

#include "olev/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "olev/error.hpp"

namespace olev {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kConfig, path + ": " + what);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Typed access to one JSON object with unknown-key rejection.
class Section {
 public:
  Section(const json& j, std::string path, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.contains(k)) fail(join(path_, k), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return join(path_, key); }

  void require(const char* key) const {
    if (!has(key)) fail(path(key), "required");
  }

  template <typename UInt>
  void get_uint(const char* key, UInt& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      fail(path(key), "expected a non-negative integer");
    }
    const auto raw = v.get<std::uint64_t>();
    if (raw > std::numeric_limits<UInt>::max()) fail(path(key), "out of range");
    out = static_cast<UInt>(raw);
  }

  void get_int(const char* key, std::int64_t& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    if (v.is_number_unsigned() &&
        v.get<std::uint64_t>() >
            static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      fail(path(key), "out of range");
    }
    out = v.get<std::int64_t>();
  }

  void get_double(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(path(key), "must be finite");
  }

  void get_doubles(const char* key, std::vector<double>& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) fail(path(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        fail(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
  }

  std::string get_string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
};

Protocol parse_protocol(const std::string& s, const std::string& path) {
  if (s == "DMA") return Protocol::kDma;
  if (s == "PHA") return Protocol::kPha;
  fail(path, "expected \"DMA\" or \"PHA\"");
}

PlateMode parse_plate_mode(const std::string& s, const std::string& path) {
  if (s == "none") return PlateMode::kNone;
  if (s == "overbill") return PlateMode::kOverbill;
  fail(path, "unknown plate mode \"" + s + "\"");
}

ObuMode parse_obu_mode(const std::string& s, const std::string& path) {
  if (s == "none") return ObuMode::kNone;
  if (s == "log_suppression") return ObuMode::kLogSuppression;
  if (s == "chain_replay") return ObuMode::kChainReplay;
  if (s == "pseudonym_reuse") return ObuMode::kPseudonymReuse;
  fail(path, "unknown obu mode \"" + s + "\"");
}

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

}  // namespace

std::string to_string(PlateMode m) {
  return m == PlateMode::kNone ? "none" : "overbill";
}

std::string to_string(ObuMode m) {
  switch (m) {
    case ObuMode::kNone:
      return "none";
    case ObuMode::kLogSuppression:
      return "log_suppression";
    case ObuMode::kChainReplay:
      return "chain_replay";
    case ObuMode::kPseudonymReuse:
      return "pseudonym_reuse";
  }
  return "none";
}

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig c;
  Section root(j, "", {"seed", "protocol", "road", "fleet", "costs", "latencies",
                       "timing", "crypto", "misbehavior"});
  root.get_uint("seed", c.seed);
  c.protocol = parse_protocol(root.get_string("protocol", "DMA"), "protocol");

  root.require("road");
  {
    Section s(root.at("road"), "road",
              {"num_plates", "plate_length_m", "auth_zone_fraction",
               "section_plates", "charge_time_ms"});
    s.require("num_plates");
    s.get_uint("num_plates", c.road.num_plates);
    s.get_double("plate_length_m", c.road.plate_length_m);
    s.get_double("auth_zone_fraction", c.road.auth_zone_fraction);
    s.get_uint("section_plates", c.road.section_plates);
    s.get_double("charge_time_ms", c.road.charge_time_ms);
  }

  root.require("fleet");
  {
    Section s(root.at("fleet"), "fleet",
              {"count", "speeds_mps", "battery_thresholds", "initial_battery",
               "energy_per_plate", "pool_size", "headway_s"});
    s.require("count");
    s.get_uint("count", c.fleet.count);
    s.get_doubles("speeds_mps", c.fleet.speeds_mps);
    s.get_doubles("battery_thresholds", c.fleet.battery_thresholds);
    s.get_doubles("initial_battery", c.fleet.initial_battery);
    s.get_double("energy_per_plate", c.fleet.energy_per_plate);
    s.get_uint("pool_size", c.fleet.pool_size);
    s.get_double("headway_s", c.fleet.headway_s);
  }

  if (root.has("costs")) {
    Section s(root.at("costs"), "costs", {"unit_cost"});
    s.get_int("unit_cost", c.costs.unit_cost);
  }
  if (root.has("latencies")) {
    Section s(root.at("latencies"), "latencies", {"dsrc_ms", "wired_ms"});
    s.get_double("dsrc_ms", c.latencies.dsrc_ms);
    s.get_double("wired_ms", c.latencies.wired_ms);
  }
  if (root.has("timing")) {
    Section s(root.at("timing"), "timing",
              {"t_hash_us", "t_mul_ms", "t_gamma_ms", "t_dec_ms", "t_enc_ms"});
    s.get_double("t_hash_us", c.timing.t_hash_us);
    s.get_double("t_mul_ms", c.timing.t_mul_ms);
    s.get_double("t_gamma_ms", c.timing.t_gamma_ms);
    s.get_double("t_dec_ms", c.timing.t_dec_ms);
    s.get_double("t_enc_ms", c.timing.t_enc_ms);
  }
  if (root.has("crypto")) {
    Section s(root.at("crypto"), "crypto",
              {"j", "t", "msk_epochs", "epoch_duration_s", "chain_length"});
    s.get_uint("j", c.crypto.j);
    s.get_uint("t", c.crypto.t);
    s.get_uint("msk_epochs", c.crypto.msk_epochs);
    s.get_double("epoch_duration_s", c.crypto.epoch_duration_s);
    s.get_uint("chain_length", c.crypto.chain_length);
  }
  if (root.has("misbehavior")) {
    Section s(root.at("misbehavior"), "misbehavior", {"plates", "obus"});
    auto read_list = [&](const char* key, auto&& on_item) {
      if (!s.has(key)) return;
      const json& arr = s.at(key);
      if (!arr.is_array()) fail(s.path(key), "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = s.path(key) + "[" + std::to_string(i) + "]";
        Section item(arr[i], p, {"id", "mode"});
        item.require("id");
        on_item(item, p);
      }
    };
    read_list("plates", [&](const Section& item, const std::string& p) {
      PlateMisbehavior m;
      item.get_uint("id", m.id);
      m.mode = parse_plate_mode(item.get_string("mode", "overbill"), p + ".mode");
      c.misbehavior.plates.push_back(m);
    });
    read_list("obus", [&](const Section& item, const std::string& p) {
      ObuMisbehavior m;
      item.get_uint("id", m.id);
      m.mode = parse_obu_mode(item.get_string("mode", "log_suppression"),
                              p + ".mode");
      c.misbehavior.obus.push_back(m);
    });
  }
  validate(c);
  return c;
}

void validate(const ScenarioConfig& c) {
  check(c.road.num_plates >= 1, "road.num_plates", "must be >= 1");
  check(c.road.plate_length_m > 0, "road.plate_length_m", "must be > 0");
  check(c.road.auth_zone_fraction > 0 && c.road.auth_zone_fraction < 1,
        "road.auth_zone_fraction", "must be in (0, 1)");
  check(c.road.charge_time_ms >= 0, "road.charge_time_ms", "must be >= 0");

  check(c.fleet.count >= 1, "fleet.count", "must be >= 1");
  check(!c.fleet.speeds_mps.empty(), "fleet.speeds_mps", "must not be empty");
  for (std::size_t i = 0; i < c.fleet.speeds_mps.size(); ++i) {
    check(c.fleet.speeds_mps[i] > 0, "fleet.speeds_mps[" + std::to_string(i) + "]",
          "must be > 0");
  }
  check(!c.fleet.battery_thresholds.empty(), "fleet.battery_thresholds",
        "must not be empty");
  for (std::size_t i = 0; i < c.fleet.battery_thresholds.size(); ++i) {
    const double v = c.fleet.battery_thresholds[i];
    check(v >= 0 && v <= 1, "fleet.battery_thresholds[" + std::to_string(i) + "]",
          "must be in [0, 1]");
  }
  check(!c.fleet.initial_battery.empty(), "fleet.initial_battery",
        "must not be empty");
  for (std::size_t i = 0; i < c.fleet.initial_battery.size(); ++i) {
    const double v = c.fleet.initial_battery[i];
    check(v >= 0 && v <= 1, "fleet.initial_battery[" + std::to_string(i) + "]",
          "must be in [0, 1]");
  }
  check(c.fleet.energy_per_plate >= 0, "fleet.energy_per_plate", "must be >= 0");
  check(c.fleet.pool_size >= 1, "fleet.pool_size", "must be >= 1");
  check(c.fleet.headway_s > 0, "fleet.headway_s", "must be > 0");

  check(c.costs.unit_cost >= 1, "costs.unit_cost", "must be >= 1");
  check(c.latencies.dsrc_ms >= 0, "latencies.dsrc_ms", "must be >= 0");
  check(c.latencies.wired_ms >= 0, "latencies.wired_ms", "must be >= 0");
  check(c.timing.t_hash_us >= 0, "timing.t_hash_us", "must be >= 0");
  check(c.timing.t_mul_ms >= 0, "timing.t_mul_ms", "must be >= 0");
  check(c.timing.t_gamma_ms >= 0, "timing.t_gamma_ms", "must be >= 0");
  check(c.timing.t_dec_ms >= 0, "timing.t_dec_ms", "must be >= 0");
  check(c.timing.t_enc_ms >= 0, "timing.t_enc_ms", "must be >= 0");

  check(c.crypto.j >= 1, "crypto.j", "must be >= 1");
  check(c.crypto.t >= 1 && c.crypto.t <= c.crypto.j, "crypto.t",
        "must satisfy 1 <= t <= j");
  check(c.crypto.msk_epochs >= 1, "crypto.msk_epochs", "must be >= 1");
  check(c.crypto.epoch_duration_s > 0, "crypto.epoch_duration_s", "must be > 0");
  check(c.crypto.chain_length >= 2, "crypto.chain_length", "must be >= 2");

  for (std::size_t i = 0; i < c.misbehavior.plates.size(); ++i) {
    check(c.misbehavior.plates[i].id < c.road.num_plates,
          "misbehavior.plates[" + std::to_string(i) + "].id", "unknown plate");
  }
  for (std::size_t i = 0; i < c.misbehavior.obus.size(); ++i) {
    const auto& m = c.misbehavior.obus[i];
    const std::string p = "misbehavior.obus[" + std::to_string(i) + "]";
    check(m.id < c.fleet.count, p + ".id", "unknown vehicle");
    if (m.mode == ObuMode::kChainReplay) {
      check(c.protocol == Protocol::kPha, p + ".mode",
            "chain_replay requires protocol PHA");
    }
    if (m.mode == ObuMode::kPseudonymReuse) {
      check(c.protocol == Protocol::kDma, p + ".mode",
            "pseudonym_reuse requires protocol DMA");
    }
  }
}

ScenarioConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["protocol"] = std::string(to_string(c.protocol));
  j["road"] = {{"num_plates", c.road.num_plates},
               {"plate_length_m", c.road.plate_length_m},
               {"auth_zone_fraction", c.road.auth_zone_fraction},
               {"section_plates", c.road.section_plates},
               {"charge_time_ms", c.road.charge_time_ms}};
  j["fleet"] = {{"count", c.fleet.count},
                {"speeds_mps", c.fleet.speeds_mps},
                {"battery_thresholds", c.fleet.battery_thresholds},
                {"initial_battery", c.fleet.initial_battery},
                {"energy_per_plate", c.fleet.energy_per_plate},
                {"pool_size", c.fleet.pool_size},
                {"headway_s", c.fleet.headway_s}};
  j["costs"] = {{"unit_cost", c.costs.unit_cost}};
  j["latencies"] = {{"dsrc_ms", c.latencies.dsrc_ms},
                    {"wired_ms", c.latencies.wired_ms}};
  j["timing"] = {{"t_hash_us", c.timing.t_hash_us},
                 {"t_mul_ms", c.timing.t_mul_ms},
                 {"t_gamma_ms", c.timing.t_gamma_ms},
                 {"t_dec_ms", c.timing.t_dec_ms},
                 {"t_enc_ms", c.timing.t_enc_ms}};
  j["crypto"] = {{"j", c.crypto.j},
                 {"t", c.crypto.t},
                 {"msk_epochs", c.crypto.msk_epochs},
                 {"epoch_duration_s", c.crypto.epoch_duration_s},
                 {"chain_length", c.crypto.chain_length}};
  json plates = json::array();
  for (const auto& m : c.misbehavior.plates) {
    plates.push_back({{"id", m.id}, {"mode", to_string(m.mode)}});
  }
  json obus = json::array();
  for (const auto& m : c.misbehavior.obus) {
    obus.push_back({{"id", m.id}, {"mode", to_string(m.mode)}});
  }
  j["misbehavior"] = {{"plates", plates}, {"obus", obus}};
  return j;
}

json normalize(const json& j) { return to_json(parse_config(j)); }

}  // namespace olev
