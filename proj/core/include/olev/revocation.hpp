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

#ifndef OLEV_REVOCATION_HPP_
#define OLEV_REVOCATION_HPP_

// Revocation authorities: share custody, warrant-gated reconstruction of the
// master secret, trapdoor decryption and pseudonym de-anonymization.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "olev/crypto.hpp"
#include "olev/dmv.hpp"

namespace olev {

// Capability object; a warrant without a case id or target is treated as
// absent.
struct Warrant {
  std::string case_id;
  Bytes target_pseudonym;
  std::string authorized_by;

  bool present() const { return !case_id.empty() && !target_pseudonym.empty(); }
};

struct EscrowEntry {
  TrapdoorCiphertext trapdoor;
  std::vector<Pseudonym> pool;
};

class RaNode {
 public:
  explicit RaNode(SecretShare share) : share_(share) {}

  std::uint32_t index() const { return share_.index; }
  bool live() const { return live_; }
  void set_live(bool live) { live_ = live; }

  // First write wins; a later package for the same X_OBU with different
  // content is rejected.
  void store_escrow(const EscrowPackage& pkg);
  const EscrowEntry* find_escrow(const Digest& x_obu) const;
  // Exact pseudonym-bytes match against every escrowed pool.
  std::optional<Digest> locate(const Pseudonym& ps) const;
  const std::map<Digest, EscrowEntry>& escrow() const { return escrow_; }

  // Only collude_reconstruct reads the share.
  friend class RevocationAuthorities;

 private:
  SecretShare share_;
  bool live_ = true;
  std::map<Digest, EscrowEntry> escrow_;
};

// Lowest index among live nodes.
const RaNode& elect_leader(std::span<const RaNode> nodes);

struct ReconstructionRecord {
  std::string case_id;
  std::string authorized_by;
  std::uint32_t leader = 0;
  std::vector<std::uint32_t> shares_used;
};

// Recovered vehicle identity from a pseudonym.
// Requires a valid DMV signature; the decrypted alpha and ID blocks must both
// carry the zero padding that issuance writes, otherwise the trapdoor does not
// belong to this pseudonym.
VehicleId deanonymize(const Scalar& x, const TrapdoorCiphertext& trapdoor,
                      const Pseudonym& ps, const GroupElement& dmv_public);

// Keys recovered from a trapdoor: (K_sym, K_V).
std::pair<SymmetricKey, SymmetricKey> open_trapdoor(
    const Scalar& x, const TrapdoorCiphertext& trapdoor);

class RevocationAuthorities {
 public:
  RevocationAuthorities(std::vector<SecretShare> shares, std::uint32_t threshold);

  std::uint32_t threshold() const { return threshold_; }
  std::vector<RaNode>& nodes() { return nodes_; }
  const std::vector<RaNode>& nodes() const { return nodes_; }
  RaNode& node(std::uint32_t index);

  void store_escrow(const EscrowPackage& pkg);

  // Reconstructs x from the listed participants. Every successful call is
  // recorded against the warrant's case id.
  Scalar collude_reconstruct(std::span<const std::uint32_t> participants,
                             const Warrant& warrant);

  const std::vector<ReconstructionRecord>& audit_log() const { return log_; }
  // Share custody export for persisting the RA collective to disk.
  std::vector<SecretShare> export_shares() const;

 private:
  std::vector<RaNode> nodes_;
  std::uint32_t threshold_;
  std::vector<ReconstructionRecord> log_;
};

}  // namespace olev

#endif  // OLEV_REVOCATION_HPP_
