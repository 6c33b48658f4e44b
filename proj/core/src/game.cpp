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

#include "olev/game.hpp"

#include "olev/error.hpp"

namespace olev {

namespace {

constexpr std::size_t idx(Strategy s) { return s == Strategy::kC ? 0 : 1; }
constexpr std::array<Strategy, 2> kStrategies{Strategy::kC, Strategy::kD};

}  // namespace

std::string to_string(Strategy s) { return s == Strategy::kC ? "C" : "D"; }

PayoffMatrix::PayoffMatrix(Cell cc, Cell cd, Cell dc, Cell dd)
    : cells_{{{cc, cd}, {dc, dd}}} {}

PayoffMatrix PayoffMatrix::table2() {
  return PayoffMatrix({1, 1}, {1, 0}, {0, 1}, {-1, -1});
}

const Cell& PayoffMatrix::at(Strategy row, Strategy col) const {
  return cells_[idx(row)][idx(col)];
}

Cell& PayoffMatrix::at(Strategy row, Strategy col) {
  return cells_[idx(row)][idx(col)];
}

double PayoffMatrix::value(Player p, Strategy row, Strategy col) const {
  const Cell& c = at(row, col);
  return p == Player::kRow ? c.row : c.col;
}

double payoff(const PayoffParams& p) { return p.advantage - p.cost; }

std::set<Strategy> best_response(const PayoffMatrix& m, Strategy opponent,
                                 Player player) {
  auto value_of = [&](Strategy own) {
    return player == Player::kRow ? m.value(player, own, opponent)
                                  : m.value(player, opponent, own);
  };
  const double best = std::max(value_of(Strategy::kC), value_of(Strategy::kD));
  std::set<Strategy> out;
  for (Strategy s : kStrategies) {
    if (value_of(s) == best) out.insert(s);
  }
  return out;
}

std::set<Profile> pure_nash(const PayoffMatrix& m) {
  std::set<Profile> out;
  for (Strategy r : kStrategies) {
    for (Strategy c : kStrategies) {
      if (best_response(m, c, Player::kRow).contains(r) &&
          best_response(m, r, Player::kCol).contains(c)) {
        out.insert({r, c});
      }
    }
  }
  return out;
}

Profile AuditOutcome::cell() const {
  return {obu_deviation_detected ? Strategy::kD : Strategy::kC,
          cp_deviation_detected ? Strategy::kD : Strategy::kC};
}

PayoffParams empirical_payoff(const AuditOutcome& o, Player player) {
  if (o.visits == 0) {
    throw Error(ErrorCode::kInvalidArgument, "no plate visits in the run");
  }
  const bool self = player == Player::kRow ? o.obu_deviation_detected
                                           : o.cp_deviation_detected;
  const bool other = player == Player::kRow ? o.cp_deviation_detected
                                            : o.obu_deviation_detected;
  double share = 0.0;
  if (player == Player::kRow) {
    share = static_cast<double>(o.charges) / static_cast<double>(o.visits);
  } else {
    share = o.bills == 0 ? 1.0
                         : static_cast<double>(o.fair_bills) /
                               static_cast<double>(o.bills);
  }
  PayoffParams p;
  p.advantage = self ? 0.0 : share;
  p.cost = (self && other) ? 1.0 : 0.0;
  return p;
}

}  // namespace olev
