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

#ifndef OLEV_CSPA_HPP_
#define OLEV_CSPA_HPP_

// Charging service providing authority: MSK epochs, DMA registration, the
// PHA chain registry and the billing ledger. All requests are handled
// serially by one Cspa instance.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "olev/auth.hpp"
#include "olev/crypto.hpp"
#include "olev/dmv.hpp"
#include "olev/op_meter.hpp"

namespace olev {

struct MskEpoch {
  std::uint64_t index = 0;  // i, MSK_i = h^i(s)
  Digest msk;
  SimTime begin{0};
  SimTime end{0};  // exclusive
};

// Epochs i = 1..l, each `duration` long, starting at time zero.
std::vector<MskEpoch> init_msk(ByteView seed, std::uint64_t l, SimTime duration);

// Epoch whose window contains t; nullopt past the last epoch or before 0.
std::optional<MskEpoch> epoch_at(const std::vector<MskEpoch>& epochs, SimTime t);

struct DmaCredentials {
  Digest x_obu;
  Digest h2;
  Digest h3;
  std::uint64_t epoch = 0;
};

struct DmaRegistration {
  Digest x_obu;
  Digest h1;
  Digest h2;
  Digest h3;
  std::uint64_t epoch = 0;
};

struct ChainRegistration {
  Digest x_obu;
  Digest head;
  std::uint64_t remaining = 0;
  ObuCertificate certificate;
  std::optional<SymmetricKey> session_key;
};

struct SessionKeyRecord {
  Digest x_obu;
  SimTime issued{0};
};

struct BillingEntry {
  SimTime timestamp{0};
  Digest x_obu;
  std::optional<Pseudonym> pseudonym;  // DMA only
  std::uint32_t plate = 0;
  std::int64_t cost = 0;

  friend bool operator==(const BillingEntry&, const BillingEntry&) = default;
};

// {ts, x_obu_hex, ps_hex?, plate, cost} as one JSON object per line.
std::string to_json_lines(const std::vector<BillingEntry>& entries);

enum class BillStatus { kRecorded, kRejectedNonUnitCost };

struct MisbehaviorFlag {
  std::string party;  // "plate" or "obu"
  std::uint32_t plate = 0;
  Digest x_obu;
  SimTime at{0};
  std::string reason;
};

class BillingLedger {
 public:
  // Appends and updates the running total for entry.x_obu.
  void append(const BillingEntry& entry);

  const std::vector<BillingEntry>& entries() const { return entries_; }
  const std::map<Digest, std::int64_t>& totals() const { return totals_; }
  std::int64_t total(const Digest& x_obu) const;
  // Totals folded from scratch over the entries.
  std::map<Digest, std::int64_t> recompute_totals() const;

 private:
  std::vector<BillingEntry> entries_;
  std::map<Digest, std::int64_t> totals_;
};

// PHA charging reply returned to the OBU through the plate:
// timestamp(6) || X_OBU(64) || h_{K_V}(beta)(64).
struct PhaChargeReply {
  Bytes frame;
};

class Cspa {
 public:
  Cspa(Bytes secret_seed, std::uint64_t epochs, SimTime epoch_duration,
       std::int64_t unit_cost, GroupElement dmv_public);

  const std::vector<MskEpoch>& epochs() const { return epochs_; }
  std::optional<MskEpoch> epoch_at(SimTime t) const;
  std::int64_t unit_cost() const { return unit_cost_; }

  // DMV -> CSPA: X_OBU (with the OBU password digest).
  void enroll(const Enrollment& e);

  // H1 = h(s || X_OBU), H2 = h(H1), H3 = MSK_epoch XOR H1. Re-registering in
  // the same epoch returns the same values.
  DmaCredentials register_dma(ByteView password, const Digest& x_obu,
                              std::uint64_t epoch);
  const DmaRegistration* dma_registration(const Digest& x_obu) const;
  // X_OBU values with a DMA registration; pushed to the plates.
  std::set<Digest> roster() const;

  // Stores head = h^n(PS); usable n - 1 times. Replaces any earlier chain of
  // the same vehicle.
  const ChainRegistration& register_chain(const Digest& x_obu, ByteView head,
                                          const ObuCertificate& cert,
                                          std::uint64_t n);
  const ChainRegistration* chain(const Digest& x_obu) const;

  // Checks h(member) == head, rotates the head and returns {SK}_{K_OBU+}.
  // One SK is minted per chain and reused for every plate.
  AuthResult<ElGamalCiphertext> verify_and_rotate(const Digest& x_obu,
                                                  const Digest& member,
                                                  SimTime timestamp,
                                                  DeterministicRng& rng);

  // Decrypts a forwarded PHA charging request with the chain session key.
  AuthResult<PhaChargeReply> handle_pha_charging_request(
      const Digest& x_obu, ByteView nonce, ByteView encrypted_frame,
      SimTime now, SimTime freshness_window);

  // Bills at any cost other than the unit cost are rejected and flagged as
  // plate misbehavior.
  BillStatus record_bill(const BillingEntry& entry);
  const BillingLedger& ledger() const { return ledger_; }

  // Flags pseudonyms that appear in more than one charging phase, where
  // section_of maps a plate id to its road section.
  std::vector<Pseudonym> scan_pseudonym_reuse(
      const std::function<std::uint32_t(std::uint32_t)>& section_of) const;

  void raise_flag(MisbehaviorFlag flag) { flags_.push_back(std::move(flag)); }
  const std::vector<MisbehaviorFlag>& flags() const { return flags_; }
  const std::vector<SessionKeyRecord>& session_keys() const {
    return session_keys_;
  }

  const OpCounts& pha_counts() const { return pha_meter_.counts(); }

 private:
  Bytes seed_;
  std::vector<MskEpoch> epochs_;
  std::int64_t unit_cost_;
  GroupElement dmv_public_;
  std::map<Digest, Digest> enrolled_;  // x_obu -> password digest
  std::map<Digest, DmaRegistration> dma_;
  std::map<Digest, ChainRegistration> chains_;
  std::map<Digest, std::set<Digest>> consumed_;  // per-vehicle replay set
  std::map<Digest, SimTime> last_request_;
  std::vector<SessionKeyRecord> session_keys_;
  BillingLedger ledger_;
  std::vector<MisbehaviorFlag> flags_;
  OpMeter pha_meter_;
};

}  // namespace olev

#endif  // OLEV_CSPA_HPP_
