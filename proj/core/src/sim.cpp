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

#include "olev/sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>

#include "olev/error.hpp"
#include "olev/wire.hpp"

namespace olev {

using nlohmann::json;

namespace {

std::int64_t to_us(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e6));
}

std::int64_t to_us(Millis ms) {
  return static_cast<std::int64_t>(std::llround(ms.count() * 1e3));
}

json counts_json(const OpCounts& c) {
  return {{"hash", c.hash}, {"xor", c.xor_ops}, {"enc", c.enc}, {"dec", c.dec}};
}

PayoffParams empirical_payoff_or_zero(const AuditOutcome& o, Player p) {
  return o.visits == 0 ? PayoffParams{} : empirical_payoff(o, p);
}

Bytes ciphertext_bytes(const ElGamalCiphertext& c) {
  return concat(c.ephemeral.view(), c.masked);
}

double min_speed(const ScenarioConfig& c) {
  return *std::min_element(c.fleet.speeds_mps.begin(), c.fleet.speeds_mps.end());
}

PlateMode plate_mode_from(const std::string& mode) {
  if (mode == "none") return PlateMode::kNone;
  if (mode == "overbill") return PlateMode::kOverbill;
  throw Error(ErrorCode::kInvalidArgument, "unknown plate mode: " + mode);
}

ObuMode obu_mode_from(const std::string& mode) {
  if (mode == "none") return ObuMode::kNone;
  if (mode == "log_suppression") return ObuMode::kLogSuppression;
  if (mode == "chain_replay") return ObuMode::kChainReplay;
  if (mode == "pseudonym_reuse") return ObuMode::kPseudonymReuse;
  throw Error(ErrorCode::kInvalidArgument, "unknown obu mode: " + mode);
}

}  // namespace

// --- JSON helpers ------------------------------------------------------------

json entry_to_json(const BillingEntry& e) {
  json j;
  j["ts"] = e.timestamp.count();
  j["x_obu_hex"] = e.x_obu.hex();
  if (e.pseudonym) j["ps_hex"] = to_hex(e.pseudonym->encode());
  j["plate"] = e.plate;
  j["cost"] = e.cost;
  return j;
}

BillingEntry entry_from_json(const json& j) {
  try {
    BillingEntry e;
    e.timestamp = SimTime(j.at("ts").get<std::int64_t>());
    e.x_obu = Digest::from_bytes(from_hex(j.at("x_obu_hex").get<std::string>()));
    if (j.contains("ps_hex")) {
      e.pseudonym = Pseudonym::decode(from_hex(j.at("ps_hex").get<std::string>()));
    }
    e.plate = j.at("plate").get<std::uint32_t>();
    e.cost = j.at("cost").get<std::int64_t>();
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kMalformedInput,
                std::string("bad billing entry: ") + ex.what());
  }
}

// --- World ---------------------------------------------------------------

World::World(const ScenarioConfig& config) : config_(config), rng_(config.seed) {}

CostModel World::cost_model() const {
  CostModel m;
  m.t_hash = Micros(config_.timing.t_hash_us);
  m.t_mul = Millis(config_.timing.t_mul_ms);
  m.t_gamma = Millis(config_.timing.t_gamma_ms);
  m.t_dec = Millis(config_.timing.t_dec_ms);
  m.t_enc = Millis(config_.timing.t_enc_ms);
  m.dsrc = Millis(config_.latencies.dsrc_ms);
  m.wired = Millis(config_.latencies.wired_ms);
  return m;
}

World World::build(const ScenarioConfig& config) {
  validate(config);
  World w(config);
  DeterministicRng sys = w.rng_.fork();
  DeterministicRng fleet_rng = w.rng_.fork();

  auto [dmv, shares] = Dmv::init_system(config.crypto.j, config.crypto.t, sys);
  w.dmv_ = std::make_unique<Dmv>(std::move(dmv));
  w.ras_ = std::make_unique<RevocationAuthorities>(std::move(shares),
                                                   config.crypto.t);
  w.cspa_ = std::make_unique<Cspa>(
      sys.bytes(32), config.crypto.msk_epochs,
      SimTime(to_us(config.crypto.epoch_duration_s)), config.costs.unit_cost,
      w.dmv_->params().dmv_public);

  const SimTime freshness(
      to_us(2.0 * config.road.plate_length_m / min_speed(config)));
  for (std::uint32_t p = 0; p < config.road.num_plates; ++p) {
    PlateConfig pc;
    pc.id = p;
    pc.unit_cost = config.costs.unit_cost;
    pc.charge_time = SimTime(to_us(Millis(config.road.charge_time_ms)));
    pc.freshness_window = freshness;
    pc.dmv_public = w.dmv_->params().dmv_public;
    w.plates_.emplace_back(pc);
  }

  const auto& f = config.fleet;
  for (std::uint32_t k = 0; k < f.count; ++k) {
    VehicleId id = vehicle_id_from_u64(fleet_rng.next_u64());
    while (w.dmv_->find(id) != nullptr) id = vehicle_id_from_u64(fleet_rng.next_u64());
    Trm trm = w.dmv_->provision_trm(id, f.pool_size, fleet_rng);
    w.ras_->store_escrow(escrow_keys(trm, fleet_rng));
    w.cspa_->enroll(w.dmv_->enrollment(trm));
    BatteryPolicy battery;
    battery.level = f.initial_battery[k % f.initial_battery.size()];
    battery.threshold = f.battery_thresholds[k % f.battery_thresholds.size()];
    battery.per_quantum = f.energy_per_plate;
    const Digest x = trm.x_obu();
    w.fleet_.push_back(Vehicle{k,
                               ObuAgent(id, std::move(trm), config.costs.unit_cost,
                                        battery),
                               f.speeds_mps[k % f.speeds_mps.size()],
                               ObuMode::kNone,
                               {x}});
  }

  for (const auto& m : config.misbehavior.plates) {
    inject_misbehavior(w, TargetKind::kPlate, m.id, to_string(m.mode));
  }
  for (const auto& m : config.misbehavior.obus) {
    inject_misbehavior(w, TargetKind::kObu, m.id, to_string(m.mode));
  }
  return w;
}

World& inject_misbehavior(World& world, TargetKind kind, std::uint32_t id,
                          const std::string& mode) {
  if (kind == TargetKind::kPlate) {
    if (id >= world.plates().size()) {
      throw Error(ErrorCode::kUnknownTarget, "no plate " + std::to_string(id));
    }
    world.plates()[id].set_behavior(plate_mode_from(mode) == PlateMode::kOverbill
                                        ? Behavior::kDeviate
                                        : Behavior::kCooperate);
  } else {
    if (id >= world.fleet().size()) {
      throw Error(ErrorCode::kUnknownTarget, "no vehicle " + std::to_string(id));
    }
    world.fleet()[id].mode = obu_mode_from(mode);
  }
  return world;
}

// --- Reconciliation --------------------------------------------------------

Reconciliation reconcile(std::span<const VehicleAccount> accounts,
                         std::span<const BillingEntry> ledger) {
  std::map<Digest, std::int64_t> cspa_totals;
  for (const auto& e : ledger) cspa_totals[e.x_obu] += e.cost;

  Reconciliation out;
  for (const auto& a : accounts) {
    std::int64_t obu_total = 0;
    for (const auto& e : a.obu_log) obu_total += e.cost;
    std::int64_t cspa_total = 0;
    const std::set<Digest> xs(a.x_obus.begin(), a.x_obus.end());
    for (const auto& x : xs) {
      if (auto it = cspa_totals.find(x); it != cspa_totals.end()) {
        cspa_total += it->second;
      }
    }
    if (obu_total != cspa_total) {
      out.match = false;
      out.discrepancies.push_back(
          Discrepancy{a.vehicle, obu_total, cspa_total, obu_total - cspa_total});
    }
  }
  return out;
}

// --- Revocation --------------------------------------------------------------

json to_json(const RevocationRecord& r) {
  return {{"case", r.case_id},
          {"pseudonym_hex", r.pseudonym_hex},
          {"recovered_id_hex", r.recovered_id_hex},
          {"x_obu_hex", r.x_obu_hex},
          {"shares_used", r.shares_used},
          {"dmv_match", r.dmv_match}};
}

RevocationRecord run_revocation(RevocationAuthorities& ras, const Dmv& dmv,
                                const Bytes& pseudonym, const Warrant& warrant) {
  const Pseudonym ps = Pseudonym::decode(pseudonym);
  const GroupElement& dmv_public = dmv.params().dmv_public;
  if (!ps.verify(dmv_public)) {
    throw Error(ErrorCode::kBadSignature, "pseudonym signature does not verify");
  }

  std::vector<std::uint32_t> participants;
  for (const auto& node : ras.nodes()) {
    if (node.live() && participants.size() < ras.threshold()) {
      participants.push_back(node.index());
    }
  }
  const Scalar x = ras.collude_reconstruct(participants, warrant);

  const EscrowEntry* entry = nullptr;
  Digest x_obu;
  for (const auto& node : ras.nodes()) {
    if (!node.live()) continue;
    if (auto found = node.locate(ps)) {
      x_obu = *found;
      entry = node.find_escrow(x_obu);
      break;
    }
  }
  if (entry == nullptr) {
    throw Error(ErrorCode::kUnknownPseudonym, "pseudonym not in any escrowed pool");
  }

  const VehicleId id = deanonymize(x, entry->trapdoor, ps, dmv_public);
  RevocationRecord r;
  r.case_id = warrant.case_id;
  r.pseudonym_hex = to_hex(pseudonym);
  r.recovered_id_hex = to_hex(id);
  r.x_obu_hex = x_obu.hex();
  r.shares_used = participants;
  if (const DmvRecord* rec = dmv.find(id)) {
    r.dmv_match = std::find(rec->x_obu_history.begin(), rec->x_obu_history.end(),
                            x_obu) != rec->x_obu_history.end();
  }
  return r;
}

RevocationRecord run_revocation(World& world, const Bytes& pseudonym,
                                const Warrant& warrant) {
  return run_revocation(world.ras(), world.dmv(), pseudonym, warrant);
}

// --- Report ------------------------------------------------------------------

std::string event_log_digest(const json& events) {
  return hash(to_bytes(std::string_view(events.dump()))).hex();
}

namespace {

json event_json(const SimEvent& e) {
  return {{"t_us", e.t_us}, {"actor", e.actor}, {"kind", e.kind}, {"data", e.payload}};
}

json flag_json(const Flag& f) {
  json j = {{"party", f.party},
            {"reason", f.reason},
            {"t_us", f.t_us},
            {"x_obu_hex", f.x_obu_hex}};
  if (f.vehicle) j["vehicle"] = *f.vehicle;
  if (f.plate) j["plate"] = *f.plate;
  if (!f.pseudonym_hex.empty()) j["pseudonym_hex"] = f.pseudonym_hex;
  return j;
}

json reconciliation_json(const Reconciliation& r) {
  json d = json::array();
  for (const auto& x : r.discrepancies) {
    d.push_back({{"vehicle", x.vehicle},
                 {"obu_total", x.obu_total},
                 {"cspa_total", x.cspa_total},
                 {"delta", x.delta}});
  }
  return {{"match", r.match}, {"discrepancies", d}};
}

json metrics_json(const SimReport& r) {
  const ScenarioConfig& c = r.config;
  CostModel m;
  m.t_hash = Micros(c.timing.t_hash_us);
  m.t_mul = Millis(c.timing.t_mul_ms);
  m.t_gamma = Millis(c.timing.t_gamma_ms);
  m.t_dec = Millis(c.timing.t_dec_ms);
  m.t_enc = Millis(c.timing.t_enc_ms);
  m.dsrc = Millis(c.latencies.dsrc_ms);
  m.wired = Millis(c.latencies.wired_ms);

  std::size_t active = 0;
  for (const auto& v : r.vehicles) {
    if (v.auth_successes > 0) ++active;
  }
  double h = 0.0;
  if (active > 0) {
    AnonymitySet set{std::vector<double>(active, 1.0 / static_cast<double>(active))};
    h = entropy(set);
  }

  json feas = json::array();
  std::set<double> speeds(c.fleet.speeds_mps.begin(), c.fleet.speeds_mps.end());
  for (double s : speeds) {
    const Feasibility f = plate_feasibility(c.road.plate_length_m, s,
                                            c.road.auth_zone_fraction,
                                            c.protocol, m);
    feas.push_back({{"speed_mps", s},
                    {"time_on_plate_ms", f.time_on_plate.count()},
                    {"auth_budget_ms", f.auth_budget.count()},
                    {"auth_time_ms", f.auth_time.count()},
                    {"feasible", f.feasible},
                    {"energy_time_remaining_ms", f.energy_time_remaining.count()}});
  }

  const OpCounts obu = expected_dma_counts(Role::kObu);
  const OpCounts cp = expected_dma_counts(Role::kCp);
  json counts = {{"obu", counts_json(obu)}, {"cp", counts_json(cp)}};
  if (c.protocol == Protocol::kDma) {
    counts["measured"] = {{"handshakes", r.dma_counts.handshakes},
                          {"obu_mismatches", r.dma_counts.obu_mismatches},
                          {"cp_mismatches", r.dma_counts.cp_mismatches},
                          {"last_obu", counts_json(r.dma_counts.last_obu)},
                          {"last_cp", counts_json(r.dma_counts.last_cp)}};
  }

  return {
      {"entropy_bits", h},
      {"max_entropy_bits", max_entropy(c.fleet.count)},
      {"counts_by_role", counts},
      {"auth_time_us",
       {{"obu", auth_compute_time(obu, m).count()},
        {"cp", auth_compute_time(cp, m).count()}}},
      {"revocation_time_ms", revocation_time(m).count()},
      {"msg_sizes",
       {{"charging_request_expected",
         message_size(c.protocol, MessageType::kChargingRequest, kPseudonymSize)},
        {"charging_request_observed", r.charging_request_sizes},
        {"charging_requests", r.charging_requests},
        {"auth_request",
         message_size(c.protocol, MessageType::kAuthRequest, kPseudonymSize)},
        {"auth_reply",
         message_size(c.protocol, MessageType::kAuthReply, kPseudonymSize)}}},
      {"feasibility", feas}};
}

}  // namespace

json SimReport::to_json() const {
  json j;
  j["config"] = olev::to_json(config);

  json vs = json::array();
  for (const auto& v : vehicles) {
    vs.push_back({{"index", v.index},
                  {"id_hex", v.id_hex},
                  {"visits", v.visits},
                  {"energy_units", v.energy_units},
                  {"bill_total", v.bill_total},
                  {"cspa_total", v.cspa_total},
                  {"auth_successes", v.auth_successes},
                  {"auth_failures", v.auth_failures},
                  {"pseudonyms_used", v.pseudonyms_used}});
  }
  j["vehicles"] = vs;

  json accs = json::array();
  for (const auto& a : accounts) {
    json xs = json::array();
    for (const auto& x : a.x_obus) xs.push_back(x.hex());
    json log = json::array();
    for (const auto& e : a.obu_log) log.push_back(entry_to_json(e));
    accs.push_back({{"vehicle", a.vehicle}, {"x_obus", xs}, {"obu_log", log}});
  }
  j["accounts"] = accs;

  json entries = json::array();
  std::map<std::string, std::int64_t> totals;
  for (const auto& e : ledger) {
    entries.push_back(entry_to_json(e));
    totals[e.x_obu.hex()] += e.cost;
  }
  j["ledger"] = {{"entries", entries}, {"totals", totals}};
  j["reconciliation"] = reconciliation_json(reconciliation);

  json fl = json::array();
  for (const auto& f : flags) fl.push_back(flag_json(f));
  j["flags"] = fl;

  json rv = json::array();
  for (const auto& r : revocations) rv.push_back(olev::to_json(r));
  j["revocations"] = rv;

  const Profile cell = outcome.cell();
  const PayoffParams row = empirical_payoff_or_zero(outcome, Player::kRow);
  const PayoffParams col = empirical_payoff_or_zero(outcome, Player::kCol);
  j["game"] = {
      {"cell", {to_string(cell.first), to_string(cell.second)}},
      {"payoffs", {payoff(row), payoff(col)}},
      {"params",
       {{"obu", {{"advantage", row.advantage}, {"cost", row.cost}}},
        {"cp", {{"advantage", col.advantage}, {"cost", col.cost}}}}},
      {"outcome",
       {{"visits", outcome.visits},
        {"charges", outcome.charges},
        {"fair_bills", outcome.fair_bills},
        {"bills", outcome.bills},
        {"obu_deviation_detected", outcome.obu_deviation_detected},
        {"cp_deviation_detected", outcome.cp_deviation_detected}}}};

  j["metrics"] = metrics_json(*this);

  json ev = json::array();
  for (const auto& e : events) ev.push_back(event_json(e));
  j["events"] = ev;
  j["event_log_digest"] = olev::event_log_digest(ev);
  return j;
}

std::string SimReport::serialize() const { return to_json().dump(2) + "\n"; }

// --- Scenario run ------------------------------------------------------------

namespace {

struct Visit {
  std::int64_t t_us;
  std::uint64_t seq;
  std::uint32_t vehicle;
  std::uint32_t plate;
  bool operator>(const Visit& o) const {
    return std::tie(t_us, seq) > std::tie(o.t_us, o.seq);
  }
};

struct VehicleRun {
  std::optional<std::uint32_t> section;
  std::uint64_t bills_seen = 0;
  VehicleSummary summary;
};

class Runner {
 public:
  explicit Runner(World& w)
      : w_(w),
        cfg_(w.config()),
        model_(w.cost_model()),
        rng_(w.rng().fork()),
        runs_(w.fleet().size()),
        plate_epoch_(w.plates().size(), 0) {
    auth_us_ = to_us(auth_latency(cfg_.protocol, model_));
    dsrc_us_ = to_us(model_.dsrc);
    wired_us_ = to_us(model_.wired);
    charge_us_ = to_us(Millis(cfg_.road.charge_time_ms));
    report_.config = cfg_;
  }

  SimReport run() {
    std::priority_queue<Visit, std::vector<Visit>, std::greater<>> queue;
    const std::int64_t headway = to_us(cfg_.fleet.headway_s);
    for (std::uint32_t k = 0; k < w_.fleet().size(); ++k) {
      queue.push(Visit{headway * k, seq_++, k, 0});
    }
    while (!queue.empty()) {
      const Visit v = queue.top();
      queue.pop();
      const Vehicle& veh = w_.fleet()[v.vehicle];
      const std::int64_t on_plate = to_us(cfg_.road.plate_length_m / veh.speed_mps);
      if (v.plate + 1 < cfg_.road.num_plates) {
        queue.push(Visit{v.t_us + on_plate, seq_++, v.vehicle, v.plate + 1});
      }
      visit(v.vehicle, v.plate, v.t_us, on_plate);
    }
    finish();
    return std::move(report_);
  }

 private:
  static std::string obu_actor(std::uint32_t v) { return "obu:" + std::to_string(v); }
  static std::string plate_actor(std::uint32_t p) {
    return "plate:" + std::to_string(p);
  }

  void log(std::int64_t t, std::string actor, std::string kind, json payload) {
    pending_.push_back({t, seq_++, SimEvent{t, std::move(actor), std::move(kind),
                                            std::move(payload)}});
  }

  void auth_fail(std::uint32_t v, std::uint32_t p, std::int64_t t, AuthFailure f) {
    ++runs_[v].summary.auth_failures;
    log(t, plate_actor(p), "auth_fail",
        {{"vehicle", v}, {"plate", p}, {"cause", std::string(to_string(f))}});
  }

  void add_flag(Flag f) {
    log(f.t_us, "cspa", "flag", flag_json(f));
    report_.flags.push_back(std::move(f));
  }

  // Refills an exhausted pool and re-escrows the extended pool.
  void refill(Vehicle& veh, std::int64_t t) {
    ObuAgent& a = veh.agent;
    auto pkg = w_.dmv().refill_pool(a.trm(), a.id(), cfg_.fleet.pool_size, rng_);
    w_.ras().store_escrow(*pkg);
    w_.cspa().enroll(w_.dmv().enrollment(a.trm()));
    veh.x_obu_history.push_back(a.x_obu());
    log(t, "dmv", "register",
        {{"vehicle", veh.index}, {"what", "pool_refill"}, {"x_obu_hex", a.x_obu().hex()}});
  }

  Pseudonym next_pseudonym(Vehicle& veh, std::int64_t t) {
    auto ps = veh.agent.rotate_pseudonym();
    if (!ps) {
      refill(veh, t);
      ps = veh.agent.rotate_pseudonym();
    }
    ++runs_[veh.index].summary.pseudonyms_used;
    return *ps;
  }

  void visit(std::uint32_t vi, std::uint32_t pi, std::int64_t t,
             std::int64_t on_plate) {
    Vehicle& veh = w_.fleet()[vi];
    ObuAgent& obu = veh.agent;
    ChargingPlate& plate = w_.plates()[pi];
    Cspa& cspa = w_.cspa();
    VehicleRun& run = runs_[vi];

    log(t, obu_actor(vi), "enter_plate", {{"vehicle", vi}, {"plate", pi}});
    if (!obu.consents()) {
      log(t, obu_actor(vi), "skip",
          {{"vehicle", vi}, {"plate", pi}, {"cause", "no_consent"}});
      return;
    }
    ++run.summary.visits;
    ++report_.outcome.visits;

    const auto epoch = cspa.epoch_at(SimTime(t));
    if (!epoch) {
      auth_fail(vi, pi, t, AuthFailure::kNotRegistered);
      return;
    }
    if (plate_epoch_[pi] != epoch->index) {
      plate.install_msk(epoch->msk);
      plate_epoch_[pi] = epoch->index;
    }

    const Feasibility feas =
        plate_feasibility(cfg_.road.plate_length_m, veh.speed_mps,
                          cfg_.road.auth_zone_fraction, cfg_.protocol, model_);
    if (!feas.feasible) {
      auth_fail(vi, pi, t, AuthFailure::kTimeBudgetExceeded);
      return;
    }

    const std::uint32_t section =
        cfg_.road.section_plates == 0 ? 0 : pi / cfg_.road.section_plates;
    const std::int64_t t_auth = t + auth_us_;
    std::optional<Pseudonym> billed_ps;

    if (cfg_.protocol == Protocol::kDma) {
      if (run.section != section) {
        if (!(veh.mode == ObuMode::kPseudonymReuse && obu.active_pseudonym())) {
          next_pseudonym(veh, t);
        }
        run.section = section;
      }
      const auto& creds = obu.dma_credentials();
      if (!creds || creds->epoch != epoch->index || creds->x_obu != obu.x_obu()) {
        obu.install_dma_credentials(
            cspa.register_dma(obu.trm().password(), obu.x_obu(), epoch->index));
        const auto roster = cspa.roster();
        for (auto& p : w_.plates()) p.update_roster(roster);
        log(t, "cspa", "register",
            {{"vehicle", vi}, {"what", "dma"}, {"epoch", epoch->index}});
      }

      plate.begin_session();
      obu.reset_meters();
      plate.reset_meters();
      const Pseudonym ps = *obu.active_pseudonym();
      const Bytes req_wire = obu.build_dma_request(ps).encode();
      auto accepted = plate.verify_dma_request(DmaAuthRequest::decode(req_wire));
      if (!accepted) {
        auth_fail(vi, pi, t + dsrc_us_, accepted.failure());
        return;
      }
      FixedBytes<kNonceSize> r_c{};
      const Bytes nonce = rng_.bytes(kNonceSize);
      std::copy(nonce.begin(), nonce.end(), r_c.begin());
      auto [reply, sk_cp] = plate.build_dma_reply(accepted.value(), r_c);
      const Bytes reply_wire = reply.encode();
      auto sk_obu = obu.finalize_dma(DmaAuthReply::decode(reply_wire));
      if (!sk_obu) {
        auth_fail(vi, pi, t_auth, sk_obu.failure());
        return;
      }
      if (!(sk_obu.value() == sk_cp)) {
        auth_fail(vi, pi, t_auth, AuthFailure::kDecryptFailed);
        return;
      }
      auto& audit = report_.dma_counts;
      ++audit.handshakes;
      audit.last_obu = obu.auth_meter().counts();
      audit.last_cp = plate.auth_meter().counts();
      if (!(audit.last_obu == expected_dma_counts(Role::kObu))) ++audit.obu_mismatches;
      if (!(audit.last_cp == expected_dma_counts(Role::kCp))) ++audit.cp_mismatches;

      ++run.summary.auth_successes;
      log(t_auth, plate_actor(pi), "auth_ok",
          {{"vehicle", vi},
           {"plate", pi},
           {"request_hex", to_hex(WireFrame{MessageKind::kDmaAuthRequest, req_wire}.encode())},
           {"reply_hex", to_hex(WireFrame{MessageKind::kDmaAuthReply, reply_wire}.encode())}});

      const DmaSession session{ps, accepted.value().x_obu, sk_cp};
      auto request = obu.build_charging_request(Protocol::kDma, SimTime(t_auth),
                                                plate.wire_id());
      note_request(*request);
      auto ack = plate.handle_charging_request_dma(session, *request,
                                                   SimTime(t_auth + dsrc_us_));
      if (!ack) {
        auth_fail(vi, pi, t_auth + dsrc_us_, ack.failure());
        return;
      }
      log(t_auth + dsrc_us_, plate_actor(pi), "charge_request",
          {{"vehicle", vi},
           {"plate", pi},
           {"request_hex", to_hex(WireFrame{MessageKind::kChargeRequest, *request}.encode())},
           {"ack_hex", to_hex(WireFrame{MessageKind::kChargeAck, ack.value().frame}.encode())}});
      billed_ps = ps;
    } else {
      if (!pha_authenticate(veh, plate, t)) return;
      auto request = obu.build_charging_request(Protocol::kPha, SimTime(t_auth),
                                                plate.wire_id());
      note_request(*request);
      auto reply = plate.relay_pha_charging_request(
          cspa, obu.x_obu(), *request, SimTime(t_auth + dsrc_us_ + wired_us_));
      if (!reply) {
        auth_fail(vi, pi, t_auth + dsrc_us_ + wired_us_, reply.failure());
        return;
      }
      log(t_auth + dsrc_us_ + wired_us_, "cspa", "charge_request",
          {{"vehicle", vi},
           {"plate", pi},
           {"request_hex", to_hex(WireFrame{MessageKind::kChargeRequest, *request}.encode())},
           {"reply_hex",
            to_hex(WireFrame{MessageKind::kPhaChargeReply, reply.value().frame}.encode())}});
    }

    const std::int64_t t_charge = t_auth + charge_us_;
    auto bill = plate.transfer_and_bill(obu.x_obu(), billed_ps,
                                        SimTime(on_plate - auth_us_), SimTime(t_charge));
    if (!bill) {
      log(t_auth, plate_actor(pi), "skip",
          {{"vehicle", vi}, {"plate", pi}, {"cause", "insufficient_time"}});
      return;
    }
    obu.receive_energy();
    ++run.summary.energy_units;
    ++report_.outcome.charges;
    ++report_.outcome.bills;
    if (bill->cost == cfg_.costs.unit_cost) ++report_.outcome.fair_bills;
    log(t_charge, plate_actor(pi), "charge", {{"vehicle", vi}, {"plate", pi}});

    const BillStatus status = cspa.record_bill(*bill);
    log(t_charge, plate_actor(pi), "bill",
        {{"vehicle", vi},
         {"entry", entry_to_json(*bill)},
         {"status", status == BillStatus::kRecorded ? "recorded" : "rejected"}});
    if (status == BillStatus::kRejectedNonUnitCost) {
      add_flag(Flag{"plate", "non_unit_cost", t_charge, vi, pi, bill->x_obu.hex(),
                    billed_ps ? to_hex(billed_ps->encode()) : ""});
    }

    const bool suppress =
        veh.mode == ObuMode::kLogSuppression && (run.bills_seen % 2 == 1);
    ++run.bills_seen;
    if (!suppress) obu.log_bill(*bill);
  }

  bool pha_authenticate(Vehicle& veh, ChargingPlate& plate, std::int64_t t) {
    ObuAgent& obu = veh.agent;
    Cspa& cspa = w_.cspa();
    const std::uint32_t vi = veh.index;
    const std::uint32_t pi = plate.id();
    const std::int64_t t_cspa = t + dsrc_us_ + wired_us_;

    if (!obu.chain() || obu.chain()->remaining() == 0) {
      const Pseudonym seed = next_pseudonym(veh, t);
      const Digest head = obu.start_chain(seed, cfg_.crypto.chain_length);
      cspa.register_chain(obu.x_obu(), head.view(), obu.trm().certificate(),
                          cfg_.crypto.chain_length);
      log(t, "cspa", "register",
          {{"vehicle", vi}, {"what", "chain"}, {"head_hex", head.hex()}});
    }

    if (veh.mode == ObuMode::kChainReplay &&
        obu.chain()->cursor < obu.chain()->length) {
      // Presents the member the CSPA already consumed.
      const Digest stale = obu.chain()->links[obu.chain()->cursor];
      auto replay = plate.relay_pha(cspa, stale, obu.x_obu(), SimTime(t_cspa), rng_);
      if (!replay) {
        auth_fail(vi, pi, t_cspa, replay.failure());
        if (replay.failure() == AuthFailure::kReplay) {
          add_flag(Flag{"obu", "chain_replay", t_cspa, vi, pi, obu.x_obu().hex(), ""});
        }
      }
    }

    auto member = obu.next_chain_member();
    if (!member) {
      auth_fail(vi, pi, t, member.failure());
      return false;
    }
    auto sealed = plate.relay_pha(cspa, member.value(), obu.x_obu(),
                                  SimTime(t_cspa), rng_);
    if (!sealed) {
      auth_fail(vi, pi, t_cspa, sealed.failure());
      return false;
    }
    obu.confirm_chain_member();
    auto sk = obu.accept_pha_session(sealed.value());
    if (!sk) {
      auth_fail(vi, pi, t + auth_us_, sk.failure());
      return false;
    }
    ++runs_[vi].summary.auth_successes;
    log(t + auth_us_, plate_actor(pi), "auth_ok",
        {{"vehicle", vi},
         {"plate", pi},
         {"member_hex", to_hex(WireFrame{MessageKind::kPhaMember,
                                         concat(member.value().view(),
                                                obu.x_obu().view())}
                                   .encode())},
         {"sealed_key_hex",
          to_hex(WireFrame{MessageKind::kPhaAuthStatus, ciphertext_bytes(sealed.value())}
                     .encode())}});
    return true;
  }

  void note_request(const Bytes& request) {
    ++report_.charging_requests;
    auto& sizes = report_.charging_request_sizes;
    if (std::find(sizes.begin(), sizes.end(), request.size()) == sizes.end()) {
      sizes.push_back(request.size());
      std::sort(sizes.begin(), sizes.end());
    }
  }

  void finish() {
    Cspa& cspa = w_.cspa();
    const std::uint32_t per_section = cfg_.road.section_plates;
    const auto reused = cspa.scan_pseudonym_reuse([per_section](std::uint32_t p) {
      return per_section == 0 ? 0u : p / per_section;
    });
    const std::int64_t t_end = pending_.empty() ? 0 : max_time();
    for (const auto& ps : reused) {
      for (const auto& veh : w_.fleet()) {
        const auto& used = veh.agent.used_pseudonyms();
        if (std::find(used.begin(), used.end(), ps) != used.end()) {
          add_flag(Flag{"obu", "pseudonym_reuse", t_end, veh.index, std::nullopt,
                        veh.agent.x_obu().hex(), to_hex(ps.encode())});
        }
      }
    }

    for (const auto& veh : w_.fleet()) {
      report_.accounts.push_back(VehicleAccount{
          veh.index, veh.x_obu_history, veh.agent.bill_log().entries()});
    }
    report_.ledger = cspa.ledger().entries();
    report_.reconciliation = reconcile(report_.accounts, report_.ledger);
    for (const auto& d : report_.reconciliation.discrepancies) {
      const auto& veh = w_.fleet()[d.vehicle];
      add_flag(Flag{d.delta > 0 ? "plate" : "obu",
                    d.delta > 0 ? "billing_excess" : "billing_shortfall", t_end,
                    d.vehicle, std::nullopt, veh.agent.x_obu().hex(), ""});
    }

    // Warrant-driven revocation of every vehicle caught deviating.
    std::set<std::uint32_t> revoked;
    std::uint64_t case_no = 0;
    for (const auto& f : std::vector<Flag>(report_.flags)) {
      if (f.party != "obu" || !f.vehicle || revoked.contains(*f.vehicle)) continue;
      revoked.insert(*f.vehicle);
      const Vehicle& veh = w_.fleet()[*f.vehicle];
      Bytes target;
      if (!f.pseudonym_hex.empty()) {
        target = from_hex(f.pseudonym_hex);
      } else if (!veh.agent.used_pseudonyms().empty()) {
        target = veh.agent.used_pseudonyms().front().encode();
      } else {
        target = veh.agent.trm().pool().front().encode();
      }
      Warrant warrant{"case-" + std::to_string(++case_no), target, "audit"};
      try {
        RevocationRecord rec = run_revocation(w_, target, warrant);
        log(t_end, "ra", "revoke", to_json(rec));
        report_.revocations.push_back(std::move(rec));
      } catch (const Error& e) {
        log(t_end, "ra", "revoke",
            {{"case", warrant.case_id}, {"error", std::string(olev::to_string(e.code()))}});
      }
    }

    for (const auto& f : report_.flags) {
      if (f.party == "obu") report_.outcome.obu_deviation_detected = true;
      if (f.party == "plate") report_.outcome.cp_deviation_detected = true;
    }

    std::map<Digest, std::int64_t> totals = cspa.ledger().recompute_totals();
    for (const auto& veh : w_.fleet()) {
      VehicleSummary s = runs_[veh.index].summary;
      s.index = veh.index;
      s.id_hex = to_hex(veh.agent.id());
      s.bill_total = veh.agent.bill_log().total();
      const std::set<Digest> xs(veh.x_obu_history.begin(), veh.x_obu_history.end());
      for (const auto& x : xs) {
        if (auto it = totals.find(x); it != totals.end()) s.cspa_total += it->second;
      }
      report_.vehicles.push_back(s);
    }

    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const auto& a, const auto& b) {
                       return std::tie(a.t, a.seq) < std::tie(b.t, b.seq);
                     });
    for (auto& p : pending_) report_.events.push_back(std::move(p.event));
    json ev = json::array();
    for (const auto& e : report_.events) ev.push_back(event_json(e));
    report_.event_log_digest = event_log_digest(ev);
  }

  std::int64_t max_time() const {
    std::int64_t m = 0;
    for (const auto& p : pending_) m = std::max(m, p.t);
    return m;
  }

  struct Pending {
    std::int64_t t;
    std::uint64_t seq;
    SimEvent event;
  };

  World& w_;
  const ScenarioConfig& cfg_;
  CostModel model_;
  DeterministicRng rng_;
  std::vector<VehicleRun> runs_;
  std::vector<std::uint64_t> plate_epoch_;
  std::int64_t auth_us_ = 0;
  std::int64_t dsrc_us_ = 0;
  std::int64_t wired_us_ = 0;
  std::int64_t charge_us_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<Pending> pending_;
  SimReport report_;
};

}  // namespace

SimReport run_scenario(World& world) { return Runner(world).run(); }

SimReport run_scenario(const ScenarioConfig& config) {
  World world = World::build(config);
  return run_scenario(world);
}

// --- Report audit --------------------------------------------------------------

ReportAudit audit_report(const json& report) {
  try {
    std::vector<VehicleAccount> accounts;
    for (const auto& a : report.at("accounts")) {
      VehicleAccount acc;
      acc.vehicle = a.at("vehicle").get<std::uint32_t>();
      for (const auto& x : a.at("x_obus")) {
        acc.x_obus.push_back(Digest::from_bytes(from_hex(x.get<std::string>())));
      }
      for (const auto& e : a.at("obu_log")) acc.obu_log.push_back(entry_from_json(e));
      accounts.push_back(std::move(acc));
    }
    std::vector<BillingEntry> ledger;
    std::map<std::string, std::int64_t> folded;
    for (const auto& e : report.at("ledger").at("entries")) {
      ledger.push_back(entry_from_json(e));
      folded[ledger.back().x_obu.hex()] += ledger.back().cost;
    }
    ReportAudit out;
    out.reconciliation = reconcile(accounts, ledger);
    out.ledger_totals_ok =
        report.at("ledger").at("totals").get<std::map<std::string, std::int64_t>>() ==
        folded;
    out.digest_ok = event_log_digest(report.at("events")) ==
                    report.at("event_log_digest").get<std::string>();
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad report: ") + e.what());
  }
}

// --- World files -----------------------------------------------------------------

PersistedWorld init_world(std::uint32_t j, std::uint32_t t, std::uint32_t vehicles,
                          std::uint32_t pool_size, std::uint64_t seed) {
  DeterministicRng rng(seed);
  DeterministicRng sys = rng.fork();
  DeterministicRng fleet_rng = rng.fork();
  auto [dmv, shares] = Dmv::init_system(j, t, sys);
  PersistedWorld w;
  w.j = j;
  w.t = t;
  w.dmv = std::make_unique<Dmv>(std::move(dmv));
  w.ras = std::make_unique<RevocationAuthorities>(std::move(shares), t);
  for (std::uint32_t k = 0; k < vehicles; ++k) {
    VehicleId id = vehicle_id_from_u64(fleet_rng.next_u64());
    while (w.dmv->find(id) != nullptr) id = vehicle_id_from_u64(fleet_rng.next_u64());
    Trm trm = w.dmv->provision_trm(id, pool_size, fleet_rng);
    w.ras->store_escrow(escrow_keys(trm, fleet_rng));
    w.fleet.emplace_back(id, trm.pool());
  }
  return w;
}

json world_to_json(const PersistedWorld& w) {
  json j;
  j["j"] = w.j;
  j["t"] = w.t;
  const SystemParams& p = w.dmv->params();
  j["master_public"] = p.master_public.hex();
  j["dmv"] = {{"public", p.dmv_public.hex()},
              {"secret", w.dmv->signing_keys().secret.hex()}};
  json records = json::array();
  for (const auto& [id, rec] : w.dmv->records()) {
    json xs = json::array();
    for (const auto& x : rec.x_obu_history) xs.push_back(x.hex());
    records.push_back({{"id", to_hex(id)}, {"x_obu_history", xs}, {"indices", rec.indices}});
  }
  j["dmv_records"] = records;
  json ras = json::array();
  for (const auto& node : w.ras->nodes()) {
    json escrow = json::array();
    for (const auto& [x, entry] : node.escrow()) {
      json pool = json::array();
      for (const auto& ps : entry.pool) pool.push_back(to_hex(ps.encode()));
      escrow.push_back({{"x_obu", x.hex()},
                        {"trapdoor",
                         {{"ephemeral", entry.trapdoor.ephemeral.hex()},
                          {"masked", to_hex(entry.trapdoor.masked)}}},
                        {"pool", pool}});
    }
    ras.push_back({{"index", node.index()}, {"live", node.live()}, {"escrow", escrow}});
  }
  j["ras"] = ras;
  // Share custody is kept apart from the escrow listing.
  json shares = json::array();
  for (const auto& s : w.ras->export_shares()) {
    shares.push_back({{"index", s.index}, {"value", s.value.hex()}});
  }
  j["ra_shares"] = shares;
  return j;
}

PersistedWorld world_from_json(const json& j) {
  try {
    PersistedWorld w;
    w.j = j.at("j").get<std::uint32_t>();
    w.t = j.at("t").get<std::uint32_t>();
    SystemParams p;
    p.master_public =
        GroupElement::from_bytes(from_hex(j.at("master_public").get<std::string>()));
    const Scalar dmv_secret =
        Scalar::from_bytes(from_hex(j.at("dmv").at("secret").get<std::string>()));
    const SigningKeypair signing = SigningKeypair::from_secret(dmv_secret);
    p.dmv_public = signing.public_key;
    if (p.dmv_public.hex() != j.at("dmv").at("public").get<std::string>()) {
      throw Error(ErrorCode::kMalformedInput, "dmv public key does not match secret");
    }
    p.ra_count = w.j;
    p.threshold = w.t;
    w.dmv = std::make_unique<Dmv>(p, signing);
    for (const auto& r : j.at("dmv_records")) {
      DmvRecord rec;
      const Bytes id = from_hex(r.at("id").get<std::string>());
      if (id.size() != kVehicleIdSize) {
        throw Error(ErrorCode::kMalformedInput, "vehicle id must be 8 bytes");
      }
      std::copy(id.begin(), id.end(), rec.id.begin());
      for (const auto& x : r.at("x_obu_history")) {
        rec.x_obu_history.push_back(Digest::from_bytes(from_hex(x.get<std::string>())));
      }
      rec.indices = r.at("indices").get<std::vector<std::uint64_t>>();
      w.dmv->import_record(std::move(rec));
    }
    std::vector<SecretShare> shares;
    for (const auto& s : j.at("ra_shares")) {
      shares.push_back(SecretShare{
          s.at("index").get<std::uint32_t>(),
          Scalar::from_bytes(from_hex(s.at("value").get<std::string>()))});
    }
    w.ras = std::make_unique<RevocationAuthorities>(std::move(shares), w.t);
    for (const auto& n : j.at("ras")) {
      RaNode& node = w.ras->node(n.at("index").get<std::uint32_t>());
      node.set_live(n.at("live").get<bool>());
      for (const auto& e : n.at("escrow")) {
        EscrowPackage pkg;
        pkg.x_obu = Digest::from_bytes(from_hex(e.at("x_obu").get<std::string>()));
        pkg.trapdoor.ephemeral = GroupElement::from_bytes(
            from_hex(e.at("trapdoor").at("ephemeral").get<std::string>()));
        pkg.trapdoor.masked = from_hex(e.at("trapdoor").at("masked").get<std::string>());
        for (const auto& ps : e.at("pool")) {
          pkg.pool.push_back(Pseudonym::decode(from_hex(ps.get<std::string>())));
        }
        node.store_escrow(pkg);
      }
    }
    return w;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad world file: ") + e.what());
  }
}

}  // namespace olev
