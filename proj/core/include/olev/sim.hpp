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

#ifndef OLEV_SIM_HPP_
#define OLEV_SIM_HPP_

// Deterministic discrete-event simulator: world assembly, scenario runs,
// bidirectional bill reconciliation, warrant-driven revocation and the JSON
// report.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "olev/config.hpp"
#include "olev/cspa.hpp"
#include "olev/dmv.hpp"
#include "olev/game.hpp"
#include "olev/metrics.hpp"
#include "olev/obu.hpp"
#include "olev/plate.hpp"
#include "olev/revocation.hpp"

namespace olev {

struct Vehicle {
  std::uint32_t index = 0;
  ObuAgent agent;
  double speed_mps = 0.0;
  ObuMode mode = ObuMode::kNone;
  std::vector<Digest> x_obu_history;  // every X_OBU this vehicle billed under
};

// Everything a scenario runs against. Built from a config and a seed.
class World {
 public:
  static World build(const ScenarioConfig& config);

  const ScenarioConfig& config() const { return config_; }
  Dmv& dmv() { return *dmv_; }
  const Dmv& dmv() const { return *dmv_; }
  RevocationAuthorities& ras() { return *ras_; }
  const RevocationAuthorities& ras() const { return *ras_; }
  Cspa& cspa() { return *cspa_; }
  const Cspa& cspa() const { return *cspa_; }
  std::vector<ChargingPlate>& plates() { return plates_; }
  const std::vector<ChargingPlate>& plates() const { return plates_; }
  std::vector<Vehicle>& fleet() { return fleet_; }
  const std::vector<Vehicle>& fleet() const { return fleet_; }
  DeterministicRng& rng() { return rng_; }
  CostModel cost_model() const;

 private:
  explicit World(const ScenarioConfig& config);

  ScenarioConfig config_;
  DeterministicRng rng_;
  std::unique_ptr<Dmv> dmv_;
  std::unique_ptr<RevocationAuthorities> ras_;
  std::unique_ptr<Cspa> cspa_;
  std::vector<ChargingPlate> plates_;
  std::vector<Vehicle> fleet_;
};

// Target kinds for inject_misbehavior.
enum class TargetKind { kPlate, kObu };

// Sets Deviate behavior on a plate ("overbill" / "none") or an OBU
// ("log_suppression", "chain_replay", "pseudonym_reuse", "none") before the
// run. Throws kUnknownTarget for an out-of-range id and kInvalidArgument for
// an unknown mode.
World& inject_misbehavior(World& world, TargetKind kind, std::uint32_t id,
                          const std::string& mode);

struct SimEvent {
  std::int64_t t_us = 0;
  std::string actor;  // "obu:<i>", "plate:<i>", "cspa", "ra"
  std::string kind;   // enter_plate, auth_ok, auth_fail, charge, bill, flag,
                      // revoke, register, skip
  nlohmann::json payload;
};

struct Flag {
  std::string party;  // "plate" or "obu"
  std::string reason;
  std::int64_t t_us = 0;
  std::optional<std::uint32_t> vehicle;
  std::optional<std::uint32_t> plate;
  std::string x_obu_hex;
  std::string pseudonym_hex;  // empty when unknown
};

struct VehicleAccount {
  std::uint32_t vehicle = 0;
  std::vector<Digest> x_obus;
  std::vector<BillingEntry> obu_log;
};

struct Discrepancy {
  std::uint32_t vehicle = 0;
  std::int64_t obu_total = 0;
  std::int64_t cspa_total = 0;
  std::int64_t delta = 0;  // obu_total - cspa_total
};

struct Reconciliation {
  bool match = true;
  std::vector<Discrepancy> discrepancies;
};

// Per-vehicle comparison of the OBU bill log against the CSPA ledger entries
// billed to any of the vehicle's X_OBU values. A positive delta means the
// CSPA holds less than the vehicle acknowledged (rejected over-billing); a
// negative delta means the vehicle logged less than it was billed.
Reconciliation reconcile(std::span<const VehicleAccount> accounts,
                         std::span<const BillingEntry> ledger);

struct RevocationRecord {
  std::string case_id;
  std::string pseudonym_hex;
  std::string recovered_id_hex;
  std::string x_obu_hex;
  std::vector<std::uint32_t> shares_used;
  bool dmv_match = false;
};

nlohmann::json to_json(const RevocationRecord& r);

// Locates the pseudonym in the RA escrow, reconstructs x from the first t
// live RAs under the warrant, de-anonymizes and checks the result against
// the DMV record. RA and crypto errors propagate.
RevocationRecord run_revocation(RevocationAuthorities& ras, const Dmv& dmv,
                                const Bytes& pseudonym, const Warrant& warrant);
RevocationRecord run_revocation(World& world, const Bytes& pseudonym,
                                const Warrant& warrant);

struct VehicleSummary {
  std::uint32_t index = 0;
  std::string id_hex;
  std::uint64_t visits = 0;
  std::uint64_t energy_units = 0;
  std::int64_t bill_total = 0;  // OBU log
  std::int64_t cspa_total = 0;
  std::uint64_t auth_successes = 0;
  std::uint64_t auth_failures = 0;
  std::uint64_t pseudonyms_used = 0;
};

struct HandshakeAudit {
  std::uint64_t handshakes = 0;
  std::uint64_t obu_mismatches = 0;
  std::uint64_t cp_mismatches = 0;
  OpCounts last_obu;
  OpCounts last_cp;
};

struct SimReport {
  ScenarioConfig config;
  std::vector<VehicleSummary> vehicles;
  std::vector<VehicleAccount> accounts;
  std::vector<BillingEntry> ledger;
  Reconciliation reconciliation;
  std::vector<Flag> flags;
  std::vector<RevocationRecord> revocations;
  AuditOutcome outcome;
  HandshakeAudit dma_counts;
  std::vector<std::size_t> charging_request_sizes;  // distinct sizes seen
  std::uint64_t charging_requests = 0;
  std::vector<SimEvent> events;
  std::string event_log_digest;

  nlohmann::json to_json() const;
  // Pretty-printed JSON with a trailing newline; the byte-identity target.
  std::string serialize() const;
};

// Hash of the canonical event serialization.
std::string event_log_digest(const nlohmann::json& events);

SimReport run_scenario(const ScenarioConfig& config);
SimReport run_scenario(World& world);

// --- Report-side audit (CLI `audit`) ----------------------------------------

struct ReportAudit {
  Reconciliation reconciliation;
  bool digest_ok = false;
  bool ledger_totals_ok = false;
};

// Recomputes reconciliation from the ledger entries and OBU logs carried in
// a report, and checks the event-log digest. Throws kMalformedInput on a
// report missing required fields.
ReportAudit audit_report(const nlohmann::json& report);

// --- World files (CLI `init` / `revoke`) -----------------------------------

// Identity-side world: DMV keys and records, RA shares and escrow.
struct PersistedWorld {
  std::uint32_t j = 0;
  std::uint32_t t = 0;
  std::unique_ptr<Dmv> dmv;
  std::unique_ptr<RevocationAuthorities> ras;
  std::vector<std::pair<VehicleId, std::vector<Pseudonym>>> fleet;
};

// Provisions `vehicles` TRMs with pools of `pool_size` and escrows them.
PersistedWorld init_world(std::uint32_t j, std::uint32_t t,
                          std::uint32_t vehicles, std::uint32_t pool_size,
                          std::uint64_t seed);
nlohmann::json world_to_json(const PersistedWorld& w);
PersistedWorld world_from_json(const nlohmann::json& j);

nlohmann::json entry_to_json(const BillingEntry& e);
BillingEntry entry_from_json(const nlohmann::json& j);

}  // namespace olev

#endif  // OLEV_SIM_HPP_
