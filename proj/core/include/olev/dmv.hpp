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

#ifndef OLEV_DMV_HPP_
#define OLEV_DMV_HPP_

// Identity root: system initialization, TRM provisioning, pseudonym issuance
// and the key escrow hand-off to the revocation authorities.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "olev/crypto.hpp"

namespace olev {

inline constexpr std::size_t kVehicleIdSize = 8;
inline constexpr std::size_t kPseudonymSize = 104;
inline constexpr std::size_t kPasswordSize = 16;

using VehicleId = FixedBytes<kVehicleIdSize>;

VehicleId vehicle_id_from_u64(std::uint64_t v);

struct SystemParams {
  GroupElement master_public;  // PK+ = xP
  GroupElement dmv_public;     // K_DMV+
  std::uint32_t ra_count = 0;
  std::uint32_t threshold = 0;
};

// Wire layout, 104 bytes:
//   enc_alpha(16) || masked_id(16) || index(8, big-endian) || signature(64)
// The signature covers the first 40 bytes.
struct Pseudonym {
  FixedBytes<16> enc_alpha{};
  FixedBytes<16> masked_id{};
  std::uint64_t index = 0;
  Signature signature;

  Bytes signed_payload() const;
  Bytes encode() const;
  static Pseudonym decode(ByteView wire);
  bool verify(const GroupElement& dmv_public) const;

  friend bool operator==(const Pseudonym&, const Pseudonym&) = default;
};

// X_OBU = h(PS^1 || ... || PS^n) over wire encodings.
Digest pool_digest(std::span<const Pseudonym> pool);

// Anonymous OBU certificate: the OBU public key bound to its current X_OBU
// under the DMV signature. Wire: obu_public(33) || x_obu(64) || sig(64).
struct ObuCertificate {
  GroupElement obu_public;
  Digest x_obu;
  Signature signature;

  Bytes signed_payload() const;
  Bytes encode() const;
  static ObuCertificate decode(ByteView wire);
  bool verify(const GroupElement& dmv_public) const;
};

using TrapdoorCiphertext = ElGamalCiphertext;

// What the RAs receive for one vehicle pool.
struct EscrowPackage {
  Digest x_obu;
  TrapdoorCiphertext trapdoor;
  std::vector<Pseudonym> pool;
};

// Material inside the TRM. Only DMV issuance and the audit/oracle path read
// it directly; protocol code goes through Trm operations.
struct TrmSecrets {
  std::uint64_t counter = 0;    // c_V
  std::uint64_t increment = 0;  // inc_V
  SymmetricKey k_sym;
  SymmetricKey k_v;
  FixedBytes<kPasswordSize> password{};
};

class Dmv;

class Trm {
 public:
  const SystemParams& params() const { return params_; }
  const std::vector<Pseudonym>& pool() const { return pool_; }
  const Digest& x_obu() const { return x_obu_; }
  const GroupElement& obu_public() const { return obu_keys_.public_key; }
  const ObuCertificate& certificate() const { return certificate_; }
  ByteView password() const { return secrets_.password; }

  // Registrations made under an older X_OBU are stale after a refill.
  bool registration_stale() const { return registration_stale_; }
  void mark_registered() { registration_stale_ = false; }

  // Pool members not yet handed out.
  std::size_t remaining() const { return pool_.size() - cursor_; }
  // Hands out the next unused pseudonym; nullopt once the pool is drained.
  std::optional<Pseudonym> take_pseudonym();

  // h_{K_V}(data), the non-repudiation token on charging requests.
  Digest mac_kv(ByteView data) const;
  // Opens {SK}_{K_OBU+} delivered through the plate.
  SymmetricKey open_session_key(const ElGamalCiphertext& envelope) const;

  const TrmSecrets& audit_secrets() const { return secrets_; }

 private:
  friend class Dmv;
  Trm() = default;

  SystemParams params_;
  TrmSecrets secrets_;
  std::vector<Pseudonym> pool_;
  std::size_t cursor_ = 0;
  std::uint64_t next_index_ = 0;
  Digest x_obu_;
  SigningKeypair obu_keys_;
  ObuCertificate certificate_;
  bool registration_stale_ = true;
};

// TRM escrow: (K_sym || K_V) under ElGamal to PK+, together with the pool.
EscrowPackage escrow_keys(const Trm& trm, DeterministicRng& rng);

struct DmvRecord {
  VehicleId id{};
  std::vector<Digest> x_obu_history;  // newest last
  std::vector<std::uint64_t> indices;
};

// Enrollment handed to the CSPA: DMV -> CSPA: X_OBU, with the digest of the
// OBU password so the CSPA can gate registration.
struct Enrollment {
  Digest x_obu;
  Digest password_digest;
};

class Dmv {
 public:
  // Fresh master secret x, PK+ = xP, j shares of x; x is dropped afterwards.
  static std::pair<Dmv, std::vector<SecretShare>> init_system(
      std::uint32_t j, std::uint32_t t, DeterministicRng& rng);

  // Rebuilds a DMV from persisted state (see sim world files).
  Dmv(SystemParams params, SigningKeypair signing);

  const SystemParams& params() const { return params_; }

  Trm provision_trm(const VehicleId& id, std::size_t n, DeterministicRng& rng);

  // alpha = c_V + n_i * inc_V (mod 2^64) for every requested index.
  std::vector<Pseudonym> generate_pseudonyms(
      const TrmSecrets& secrets, std::span<const std::uint64_t> indices,
      const VehicleId& id) const;

  // Appends n_more pseudonyms, recomputes X_OBU, re-certifies and returns the
  // fresh escrow package. n_more == 0 leaves the TRM untouched.
  std::optional<EscrowPackage> refill_pool(Trm& trm, const VehicleId& id,
                                           std::size_t n_more,
                                           DeterministicRng& rng);

  Enrollment enrollment(const Trm& trm) const;

  const DmvRecord* find(const VehicleId& id) const;
  const DmvRecord* find_by_x_obu(const Digest& x_obu) const;
  const std::map<VehicleId, DmvRecord>& records() const { return records_; }
  // Restores a persisted record; throws kDuplicateVehicle if present.
  void import_record(DmvRecord record);
  const SigningKeypair& signing_keys() const { return signing_; }

 private:
  void certify(Trm& trm) const;
  void extend_pool(Trm& trm, const VehicleId& id, std::size_t n,
                   DeterministicRng& rng);

  SystemParams params_;
  SigningKeypair signing_;
  std::map<VehicleId, DmvRecord> records_;
};

}  // namespace olev

#endif  // OLEV_DMV_HPP_
