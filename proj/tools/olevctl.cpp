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

// olevctl: world setup, scenario runs, report audit, revocation and the
// audit game from the command line.
//
// Exit codes: 0 success, 2 validation error, 3 audit discrepancy.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "olev/config.hpp"
#include "olev/error.hpp"
#include "olev/game.hpp"
#include "olev/sim.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDiscrepancy = 3;

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw olev::Error(olev::ErrorCode::kConfig, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw olev::Error(olev::ErrorCode::kMalformedInput,
                      path + ": " + std::string(e.what()));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw olev::Error(olev::ErrorCode::kConfig, "cannot write " + path);
  out << text;
}

json matrix_json(const olev::PayoffMatrix& m) {
  using olev::Strategy;
  json cells = json::object();
  for (Strategy r : {Strategy::kC, Strategy::kD}) {
    for (Strategy c : {Strategy::kC, Strategy::kD}) {
      const auto& cell = m.at(r, c);
      cells[olev::to_string(r) + olev::to_string(c)] = {cell.row, cell.col};
    }
  }
  return cells;
}

json game_json(const olev::PayoffMatrix& m) {
  using olev::Player;
  using olev::Strategy;
  auto names = [](const std::set<Strategy>& s) {
    json a = json::array();
    for (Strategy x : s) a.push_back(olev::to_string(x));
    return a;
  };
  json br;
  for (Strategy opp : {Strategy::kC, Strategy::kD}) {
    br["obu_vs_cp_" + olev::to_string(opp)] =
        names(olev::best_response(m, opp, Player::kRow));
    br["cp_vs_obu_" + olev::to_string(opp)] =
        names(olev::best_response(m, opp, Player::kCol));
  }
  json nash = json::array();
  for (const auto& [r, c] : olev::pure_nash(m)) {
    nash.push_back({olev::to_string(r), olev::to_string(c)});
  }
  return {{"matrix", matrix_json(m)}, {"best_responses", br}, {"nash", nash}};
}

int cmd_init(std::uint32_t j, std::uint32_t t, std::uint32_t vehicles,
             std::uint32_t pool, std::uint64_t seed, const std::string& out) {
  const olev::PersistedWorld w = olev::init_world(j, t, vehicles, pool, seed);
  write_text(out, olev::world_to_json(w).dump(2) + "\n");
  std::cout << "world: " << j << " RAs (threshold " << t << "), " << vehicles
            << " vehicles x " << pool << " pseudonyms -> " << out << "\n";
  return kExitOk;
}

int cmd_run(const std::string& scenario, const std::string& out) {
  const olev::ScenarioConfig cfg = olev::load_config(scenario);
  const olev::SimReport report = olev::run_scenario(cfg);
  write_text(out, report.serialize());
  const auto cell = report.outcome.cell();
  std::cout << "events " << report.events.size() << ", ledger entries "
            << report.ledger.size() << ", reconciliation "
            << (report.reconciliation.match ? "match" : "MISMATCH") << ", cell ("
            << olev::to_string(cell.first) << "," << olev::to_string(cell.second)
            << "), digest " << report.event_log_digest.substr(0, 16) << " -> "
            << out << "\n";
  return kExitOk;
}

int cmd_audit(const std::string& path) {
  const olev::ReportAudit a = olev::audit_report(read_json(path));
  json d = json::array();
  for (const auto& x : a.reconciliation.discrepancies) {
    d.push_back({{"vehicle", x.vehicle},
                 {"obu_total", x.obu_total},
                 {"cspa_total", x.cspa_total},
                 {"delta", x.delta}});
  }
  json out = {{"match", a.reconciliation.match},
              {"discrepancies", d},
              {"event_log_digest_ok", a.digest_ok},
              {"ledger_totals_ok", a.ledger_totals_ok}};
  std::cout << out.dump(2) << "\n";
  const bool clean = a.reconciliation.match && a.digest_ok && a.ledger_totals_ok;
  return clean ? kExitOk : kExitDiscrepancy;
}

int cmd_revoke(const std::string& world_path, const std::string& pseudonym_hex,
               const std::string& case_id, const std::string& authorized_by,
               const std::vector<std::uint32_t>& offline) {
  olev::PersistedWorld w = olev::world_from_json(read_json(world_path));
  for (std::uint32_t idx : offline) w.ras->node(idx).set_live(false);
  const olev::Bytes ps = olev::from_hex(pseudonym_hex);
  const olev::Warrant warrant{case_id, ps, authorized_by};
  const olev::RevocationRecord r = olev::run_revocation(*w.ras, *w.dmv, ps, warrant);
  std::cout << olev::to_json(r).dump(2) << "\n";
  return kExitOk;
}

int cmd_game(const std::string& matrix, const std::string& report_path) {
  const olev::PayoffMatrix m = olev::PayoffMatrix::table2();
  if (matrix != "table2") {
    throw olev::Error(olev::ErrorCode::kInvalidArgument,
                      "unknown matrix: " + matrix);
  }
  json out = game_json(m);
  if (!report_path.empty()) {
    const json report = read_json(report_path);
    olev::AuditOutcome o;
    try {
      const json& g = report.at("game").at("outcome");
      o.visits = g.at("visits").get<std::uint64_t>();
      o.charges = g.at("charges").get<std::uint64_t>();
      o.fair_bills = g.at("fair_bills").get<std::uint64_t>();
      o.bills = g.at("bills").get<std::uint64_t>();
      o.obu_deviation_detected = g.at("obu_deviation_detected").get<bool>();
      o.cp_deviation_detected = g.at("cp_deviation_detected").get<bool>();
    } catch (const json::exception& e) {
      throw olev::Error(olev::ErrorCode::kMalformedInput,
                        std::string("bad report: ") + e.what());
    }
    const auto row = olev::empirical_payoff(o, olev::Player::kRow);
    const auto col = olev::empirical_payoff(o, olev::Player::kCol);
    const auto cell = o.cell();
    out["report"] = {
        {"cell", {olev::to_string(cell.first), olev::to_string(cell.second)}},
        {"payoffs", {olev::payoff(row), olev::payoff(col)}},
        {"table_cell", {m.at(cell.first, cell.second).row,
                        m.at(cell.first, cell.second).col}}};
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OLEV billing protocol simulator"};
  app.require_subcommand(1);

  std::uint32_t j = 5, t = 3, vehicles = 4, pool = 16;
  std::uint64_t seed = 1;
  std::string out;
  auto* init = app.add_subcommand("init", "create DMV, RAs and an escrowed fleet");
  init->add_option("--j", j, "number of revocation authorities");
  init->add_option("--t", t, "reconstruction threshold");
  init->add_option("--vehicles", vehicles, "vehicles to provision");
  init->add_option("--pool", pool, "pseudonyms per vehicle");
  init->add_option("--seed", seed, "randomness seed");
  init->add_option("--out", out, "world file")->required();

  std::string scenario;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("--scenario", scenario, "scenario JSON")->required();
  run->add_option("--out", out, "report JSON")->required();

  std::string report;
  auto* audit = app.add_subcommand("audit", "re-check a report");
  audit->add_option("--report", report, "report JSON")->required();

  std::string world, pseudonym, case_id, authorized_by = "court";
  std::vector<std::uint32_t> offline;
  auto* revoke = app.add_subcommand("revoke", "de-anonymize a pseudonym under warrant");
  revoke->add_option("--world", world, "world file")->required();
  revoke->add_option("--pseudonym", pseudonym, "pseudonym hex")->required();
  revoke->add_option("--case", case_id, "warrant case id")->required();
  revoke->add_option("--authorized-by", authorized_by, "warrant issuer");
  revoke->add_option("--offline", offline, "RA indices to take offline");

  std::string matrix = "table2";
  std::string from_report;
  auto* game = app.add_subcommand("game", "audit game analysis");
  game->add_option("--matrix", matrix, "payoff matrix (table2)");
  game->add_option("--from-report", from_report, "map a report onto the game");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*init) return cmd_init(j, t, vehicles, pool, seed, out);
    if (*run) return cmd_run(scenario, out);
    if (*audit) return cmd_audit(report);
    if (*revoke) return cmd_revoke(world, pseudonym, case_id, authorized_by, offline);
    if (*game) return cmd_game(matrix, from_report);
  } catch (const olev::Error& e) {
    std::cerr << "error [" << olev::to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
