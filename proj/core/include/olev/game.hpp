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

#ifndef OLEV_GAME_HPP_
#define OLEV_GAME_HPP_

// Two-player audit game between the vehicle (row player) and the charging
// plate (column player), each choosing Cooperate or Deviate.

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>

namespace olev {

enum class Strategy { kC, kD };
enum class Player { kRow, kCol };  // row = OBU, col = CP

std::string to_string(Strategy s);

using Profile = std::pair<Strategy, Strategy>;  // (row, col)

struct Cell {
  double row = 0.0;
  double col = 0.0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

class PayoffMatrix {
 public:
  PayoffMatrix() = default;
  PayoffMatrix(Cell cc, Cell cd, Cell dc, Cell dd);

  // {(C,C):(1,1), (C,D):(1,0), (D,C):(0,1), (D,D):(-1,-1)}
  static PayoffMatrix table2();

  const Cell& at(Strategy row, Strategy col) const;
  Cell& at(Strategy row, Strategy col);
  double value(Player p, Strategy row, Strategy col) const;

 private:
  std::array<std::array<Cell, 2>, 2> cells_{};
};

struct PayoffParams {
  double advantage = 0.0;  // a_i(t)
  double cost = 0.0;       // cost_i(t)
};

// PO_i(t) = a_i(t) - cost_i(t)
double payoff(const PayoffParams& p);

// Strategies maximizing `player`'s payoff with the opponent fixed. Ties
// return both; never empty.
std::set<Strategy> best_response(const PayoffMatrix& m, Strategy opponent,
                                 Player player);

// Profiles where each player's strategy is a best response to the other's.
std::set<Profile> pure_nash(const PayoffMatrix& m);

// Observable outcome of a simulated run, as needed by the payoff calibration.
struct AuditOutcome {
  std::uint64_t visits = 0;         // plate visits with driver consent
  std::uint64_t charges = 0;        // energy quanta delivered
  std::uint64_t fair_bills = 0;     // bills at the unit cost
  std::uint64_t bills = 0;          // all bills issued by plates
  bool obu_deviation_detected = false;
  bool cp_deviation_detected = false;

  Profile cell() const;
};

// Calibrated mapping from a run onto the game's payoff scale:
//   a_i    = service share of player i, forfeited when i is caught deviating
//            (OBU: charges / visits; CP: fair_bills / bills)
//   cost_i = 1 when both sides are caught (mutual revocation), else 0
// Honest runs land on (1,1); one-sided detected deviation on (1,0) or (0,1);
// mutual deviation on (-1,-1). Throws kInvalidArgument for an empty run.
PayoffParams empirical_payoff(const AuditOutcome& outcome, Player player);

}  // namespace olev

#endif  // OLEV_GAME_HPP_
