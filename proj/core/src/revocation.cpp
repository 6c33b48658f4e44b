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

#include "olev/revocation.hpp"

#include <algorithm>

#include "olev/error.hpp"

namespace olev {

void RaNode::store_escrow(const EscrowPackage& pkg) {
  auto [it, inserted] =
      escrow_.try_emplace(pkg.x_obu, EscrowEntry{pkg.trapdoor, pkg.pool});
  if (!inserted &&
      (it->second.trapdoor != pkg.trapdoor || it->second.pool != pkg.pool)) {
    throw Error(ErrorCode::kInvalidArgument,
                "escrow entry for this X_OBU already stored");
  }
}

const EscrowEntry* RaNode::find_escrow(const Digest& x_obu) const {
  auto it = escrow_.find(x_obu);
  return it == escrow_.end() ? nullptr : &it->second;
}

std::optional<Digest> RaNode::locate(const Pseudonym& ps) const {
  for (const auto& [x_obu, entry] : escrow_) {
    if (std::find(entry.pool.begin(), entry.pool.end(), ps) != entry.pool.end()) {
      return x_obu;
    }
  }
  return std::nullopt;
}

const RaNode& elect_leader(std::span<const RaNode> nodes) {
  const RaNode* leader = nullptr;
  for (const auto& n : nodes) {
    if (!n.live()) continue;
    if (leader == nullptr || n.index() < leader->index()) leader = &n;
  }
  if (leader == nullptr) {
    throw Error(ErrorCode::kNoLiveNode, "no live revocation authority");
  }
  return *leader;
}

std::pair<SymmetricKey, SymmetricKey> open_trapdoor(
    const Scalar& x, const TrapdoorCiphertext& trapdoor) {
  const Bytes keys = elgamal_decrypt(x, trapdoor);
  if (keys.size() != 2 * kKeySize) {
    throw Error(ErrorCode::kMalformedInput, "trapdoor must hold two keys");
  }
  return {SymmetricKey::from_bytes(ByteView(keys).first(kKeySize)),
          SymmetricKey::from_bytes(ByteView(keys).last(kKeySize))};
}

VehicleId deanonymize(const Scalar& x, const TrapdoorCiphertext& trapdoor,
                      const Pseudonym& ps, const GroupElement& dmv_public) {
  if (!ps.verify(dmv_public)) {
    throw Error(ErrorCode::kBadSignature, "pseudonym signature invalid");
  }
  const auto [k_sym, k_v] = open_trapdoor(x, trapdoor);
  const Bytes alpha_block = sym_decrypt(k_sym, ps.enc_alpha);
  const Bytes id_block = sym_decrypt(k_v, ps.masked_id);
  auto zero_prefix = [](const Bytes& b) {
    return std::all_of(b.begin(), b.begin() + 8,
                       [](std::uint8_t v) { return v == 0; });
  };
  if (!zero_prefix(alpha_block) || !zero_prefix(id_block)) {
    throw Error(ErrorCode::kInconsistentDecryption,
                "trapdoor keys do not open this pseudonym");
  }
  const Bytes id = xor_equal(ByteView(id_block).last(8),
                             ByteView(alpha_block).last(8));
  VehicleId out{};
  std::copy(id.begin(), id.end(), out.begin());
  return out;
}

RevocationAuthorities::RevocationAuthorities(std::vector<SecretShare> shares,
                                             std::uint32_t threshold)
    : threshold_(threshold) {
  if (threshold == 0 || threshold > shares.size()) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must be in [1, j]");
  }
  nodes_.reserve(shares.size());
  for (const auto& s : shares) nodes_.emplace_back(s);
}

RaNode& RevocationAuthorities::node(std::uint32_t index) {
  for (auto& n : nodes_) {
    if (n.index() == index) return n;
  }
  throw Error(ErrorCode::kUnknownTarget, "no RA with that index");
}

void RevocationAuthorities::store_escrow(const EscrowPackage& pkg) {
  for (auto& n : nodes_) n.store_escrow(pkg);
}

Scalar RevocationAuthorities::collude_reconstruct(
    std::span<const std::uint32_t> participants, const Warrant& warrant) {
  if (!warrant.present()) {
    throw Error(ErrorCode::kMissingWarrant,
                "reconstruction requires a warrant");
  }
  std::vector<const RaNode*> live;
  for (std::uint32_t idx : participants) {
    const RaNode& n = node(idx);
    if (n.live()) live.push_back(&n);
  }
  if (live.size() < threshold_) {
    throw Error(ErrorCode::kBelowThreshold,
                "fewer than t live revocation authorities");
  }
  // Same rule as elect_leader, applied to the participating subset.
  const RaNode* leader = *std::min_element(
      live.begin(), live.end(),
      [](const RaNode* a, const RaNode* b) { return a->index() < b->index(); });

  std::vector<SecretShare> shares;
  for (const RaNode* n : live) shares.push_back(n->share_);
  const Scalar x = reconstruct_secret(shares, threshold_);

  ReconstructionRecord rec{warrant.case_id, warrant.authorized_by,
                           leader->index(), {}};
  for (std::size_t i = 0; i < threshold_; ++i) {
    rec.shares_used.push_back(shares[i].index);
  }
  log_.push_back(std::move(rec));
  return x;
}

std::vector<SecretShare> RevocationAuthorities::export_shares() const {
  std::vector<SecretShare> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.share_);
  return out;
}

}  // namespace olev
