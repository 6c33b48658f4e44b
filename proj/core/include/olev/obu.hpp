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

#ifndef OLEV_OBU_HPP_
#define OLEV_OBU_HPP_

// Vehicle-side protocol agent.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "olev/auth.hpp"
#include "olev/cspa.hpp"
#include "olev/dmv.hpp"
#include "olev/op_meter.hpp"
#include "olev/plate.hpp"

namespace olev {

class ObuBillLog {
 public:
  void append(const BillingEntry& entry);
  const std::vector<BillingEntry>& entries() const { return entries_; }
  std::int64_t total() const { return total_; }
  // Same schema as the CSPA ledger export.
  std::string to_json_lines() const { return olev::to_json_lines(entries_); }

 private:
  std::vector<BillingEntry> entries_;
  std::int64_t total_ = 0;
};

// Hash chain over one pseudonym: links[i] = h^i(PS) for 1 <= i <= n. The
// cursor is the exponent of the head the CSPA currently holds.
struct ChainState {
  Pseudonym seed;
  std::vector<Digest> links;  // index 0 unused
  std::uint64_t length = 0;
  std::uint64_t cursor = 0;

  const Digest& head() const { return links.at(cursor); }
  std::uint64_t remaining() const { return cursor == 0 ? 0 : cursor - 1; }
};

ChainState make_chain(const Pseudonym& seed, std::uint64_t n);

struct BatteryPolicy {
  double level = 0.5;
  double threshold = 0.9;
  double per_quantum = 0.01;
};

class ObuAgent {
 public:
  ObuAgent(VehicleId id, Trm trm, std::int64_t unit_cost, BatteryPolicy battery);

  const VehicleId& id() const { return id_; }
  Trm& trm() { return trm_; }
  const Trm& trm() const { return trm_; }
  const Digest& x_obu() const { return trm_.x_obu(); }

  // Fresh pseudonym for a new charging phase; nullopt when the pool is empty.
  std::optional<Pseudonym> rotate_pseudonym();
  const std::optional<Pseudonym>& active_pseudonym() const { return active_; }
  // Every pseudonym this agent presented, in order of first use.
  const std::vector<Pseudonym>& used_pseudonyms() const { return used_; }

  // Driver consent: charge while the battery is below the threshold.
  bool consents() const { return battery_.level < battery_.threshold; }
  void receive_energy() { battery_.level += battery_.per_quantum; }
  const BatteryPolicy& battery() const { return battery_; }

  // --- DMA ---------------------------------------------------------------
  void install_dma_credentials(const DmaCredentials& creds);
  const std::optional<DmaCredentials>& dma_credentials() const {
    return credentials_;
  }
  // c1 = h(H2) ^ PS, c2 = h(PS) ^ X_OBU, c3 = h(h(PS) || c2 || H3).
  // Throws kNotRegistered without current credentials.
  DmaAuthRequest build_dma_request(const Pseudonym& ps);
  // Recovers r_c from c5, checks c6, derives SK = h(PS || r_c) and stores
  // H1 = c7 ^ h^2(PS).
  AuthResult<SymmetricKey> finalize_dma(const DmaAuthReply& reply);
  const std::optional<Digest>& stored_h1() const { return h1_; }

  // --- PHA ---------------------------------------------------------------
  // Builds the chain over ps and returns its head h^n(PS).
  Digest start_chain(const Pseudonym& ps, std::uint64_t n);
  const std::optional<ChainState>& chain() const { return chain_; }
  // h^{k-1}(PS) for a head at h^k; kChainExhausted at h^1.
  AuthResult<Digest> next_chain_member() const;
  // Moves the cursor down after the CSPA accepted the member.
  void confirm_chain_member();
  AuthResult<SymmetricKey> accept_pha_session(const ElGamalCiphertext& sealed);

  // --- Charging ------------------------------------------------------------
  // Encrypted charging request for the current session; nullopt without
  // driver consent. Throws kNoSessionKey before a session is established.
  std::optional<Bytes> build_charging_request(Protocol protocol, SimTime ts,
                                              const PlateId& plate);
  // Plaintext frame (before encryption); exposed for size accounting.
  Bytes charging_frame(Protocol protocol, SimTime ts) const;

  const std::optional<SymmetricKey>& session_key() const { return session_key_; }
  void clear_session() { session_key_.reset(); }

  // Logs an acknowledged charge at the unit cost this OBU knows.
  void log_bill(const BillingEntry& billed);
  const ObuBillLog& bill_log() const { return log_; }

  const OpMeter& auth_meter() const { return auth_meter_; }
  const OpMeter& session_meter() const { return session_meter_; }
  void reset_meters() {
    auth_meter_.reset();
    session_meter_.reset();
  }

 private:
  VehicleId id_;
  Trm trm_;
  std::int64_t unit_cost_;
  BatteryPolicy battery_;
  std::optional<Pseudonym> active_;
  std::vector<Pseudonym> used_;

  std::optional<DmaCredentials> credentials_;
  struct PendingDma {
    Pseudonym ps;
    Digest h_ps;
  };
  std::optional<PendingDma> pending_;
  std::optional<Digest> h1_;

  std::optional<ChainState> chain_;
  std::optional<SymmetricKey> session_key_;
  ObuBillLog log_;
  OpMeter auth_meter_;
  OpMeter session_meter_;
};

}  // namespace olev

#endif  // OLEV_OBU_HPP_
