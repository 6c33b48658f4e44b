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

#include "olev/dmv.hpp"

#include <algorithm>

#include "olev/error.hpp"

namespace olev {

namespace {

// 64-bit value as the low half of a 16-byte big-endian block.
FixedBytes<16> pad_block(std::uint64_t v) {
  FixedBytes<16> out{};
  const Bytes be = encode_be(v, 8);
  std::copy(be.begin(), be.end(), out.begin() + 8);
  return out;
}

template <std::size_t N>
FixedBytes<N> to_fixed(ByteView v) {
  FixedBytes<N> out{};
  std::copy_n(v.begin(), N, out.begin());
  return out;
}

}  // namespace

VehicleId vehicle_id_from_u64(std::uint64_t v) {
  return to_fixed<kVehicleIdSize>(encode_be(v, kVehicleIdSize));
}

// Pseudonym --------------------------------------------------------------

Bytes Pseudonym::signed_payload() const {
  return concat(enc_alpha, masked_id, encode_be(index, 8));
}

Bytes Pseudonym::encode() const {
  Bytes out = signed_payload();
  append(out, signature.view());
  return out;
}

Pseudonym Pseudonym::decode(ByteView wire) {
  if (wire.size() != kPseudonymSize) {
    throw Error(ErrorCode::kMalformedInput, "pseudonym must be 104 bytes");
  }
  Pseudonym ps;
  ps.enc_alpha = to_fixed<16>(wire.subspan(0, 16));
  ps.masked_id = to_fixed<16>(wire.subspan(16, 16));
  ps.index = decode_be(wire.subspan(32, 8));
  ps.signature = Signature::from_bytes(wire.subspan(40, kSignatureSize));
  return ps;
}

bool Pseudonym::verify(const GroupElement& dmv_public) const {
  return olev::verify(dmv_public, signed_payload(), signature);
}

Digest pool_digest(std::span<const Pseudonym> pool) {
  Bytes all;
  all.reserve(pool.size() * kPseudonymSize);
  for (const auto& ps : pool) append(all, ps.encode());
  return hash(all);
}

// ObuCertificate ---------------------------------------------------------

Bytes ObuCertificate::signed_payload() const {
  return concat(obu_public.view(), x_obu.view());
}

Bytes ObuCertificate::encode() const {
  Bytes out = signed_payload();
  append(out, signature.view());
  return out;
}

ObuCertificate ObuCertificate::decode(ByteView wire) {
  if (wire.size() != kPointSize + kDigestSize + kSignatureSize) {
    throw Error(ErrorCode::kMalformedInput, "certificate must be 161 bytes");
  }
  ObuCertificate c;
  c.obu_public = GroupElement::from_bytes(wire.subspan(0, kPointSize));
  c.x_obu = Digest::from_bytes(wire.subspan(kPointSize, kDigestSize));
  c.signature =
      Signature::from_bytes(wire.subspan(kPointSize + kDigestSize));
  return c;
}

bool ObuCertificate::verify(const GroupElement& dmv_public) const {
  return olev::verify(dmv_public, signed_payload(), signature);
}

// Trm --------------------------------------------------------------------

std::optional<Pseudonym> Trm::take_pseudonym() {
  if (cursor_ >= pool_.size()) return std::nullopt;
  return pool_[cursor_++];
}

Digest Trm::mac_kv(ByteView data) const { return keyed_hash(secrets_.k_v, data); }

SymmetricKey Trm::open_session_key(const ElGamalCiphertext& envelope) const {
  const Bytes raw = elgamal_decrypt(obu_keys_.secret, envelope);
  return SymmetricKey::from_bytes(raw);
}

EscrowPackage escrow_keys(const Trm& trm, DeterministicRng& rng) {
  const auto& s = trm.audit_secrets();
  const Bytes keys = concat(s.k_sym.view(), s.k_v.view());
  return EscrowPackage{
      trm.x_obu(),
      elgamal_encrypt(trm.params().master_public, keys, rng.scalar()),
      trm.pool()};
}

// Dmv --------------------------------------------------------------------

Dmv::Dmv(SystemParams params, SigningKeypair signing)
    : params_(params), signing_(signing) {}

std::pair<Dmv, std::vector<SecretShare>> Dmv::init_system(
    std::uint32_t j, std::uint32_t t, DeterministicRng& rng) {
  if (j == 0 || t == 0 || t > j) {
    throw Error(ErrorCode::kInvalidArgument,
                "system init requires 1 <= t <= j");
  }
  const Scalar x = rng.scalar();
  const SigningKeypair signing = SigningKeypair::from_secret(rng.scalar());
  SystemParams params{mul_base(x), signing.public_key, j, t};
  auto shares = share_secret(x, j, t, rng);
  return {Dmv(params, signing), std::move(shares)};
}

std::vector<Pseudonym> Dmv::generate_pseudonyms(
    const TrmSecrets& secrets, std::span<const std::uint64_t> indices,
    const VehicleId& id) const {
  std::vector<Pseudonym> out;
  out.reserve(indices.size());
  for (std::uint64_t n : indices) {
    const std::uint64_t alpha = secrets.counter + n * secrets.increment;
    Pseudonym ps;
    ps.enc_alpha = to_fixed<16>(sym_encrypt(secrets.k_sym, pad_block(alpha)));
    const Bytes masked = xor_equal(encode_be(alpha, 8), id);
    FixedBytes<16> id_block{};
    std::copy(masked.begin(), masked.end(), id_block.begin() + 8);
    ps.masked_id = to_fixed<16>(sym_encrypt(secrets.k_v, id_block));
    ps.index = n;
    ps.signature = sign(signing_.secret, ps.signed_payload());
    out.push_back(ps);
  }
  return out;
}

void Dmv::certify(Trm& trm) const {
  trm.x_obu_ = pool_digest(trm.pool_);
  trm.certificate_.obu_public = trm.obu_keys_.public_key;
  trm.certificate_.x_obu = trm.x_obu_;
  trm.certificate_.signature =
      sign(signing_.secret, trm.certificate_.signed_payload());
}

void Dmv::extend_pool(Trm& trm, const VehicleId& id, std::size_t n,
                      DeterministicRng& rng) {
  // Indices are strictly increasing but not consecutive.
  std::vector<std::uint64_t> indices;
  indices.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    trm.next_index_ += 1 + rng.next_u64() % 3;
    indices.push_back(trm.next_index_);
  }
  auto fresh = generate_pseudonyms(trm.secrets_, indices, id);
  trm.pool_.insert(trm.pool_.end(), fresh.begin(), fresh.end());
  auto& rec = records_.at(id);
  rec.indices.insert(rec.indices.end(), indices.begin(), indices.end());
}

Trm Dmv::provision_trm(const VehicleId& id, std::size_t n,
                       DeterministicRng& rng) {
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "pseudonym pool size must be >= 1");
  }
  if (records_.contains(id)) {
    throw Error(ErrorCode::kDuplicateVehicle,
                "vehicle " + to_hex(id) + " already provisioned");
  }
  Trm trm;
  trm.params_ = params_;
  trm.secrets_.counter = rng.next_u64();
  trm.secrets_.increment = rng.next_u64() | 1;
  trm.secrets_.k_sym = rng.key();
  trm.secrets_.k_v = rng.key();
  const Bytes pwd = rng.bytes(kPasswordSize);
  std::copy(pwd.begin(), pwd.end(), trm.secrets_.password.begin());
  trm.obu_keys_ = SigningKeypair::from_secret(rng.scalar());

  records_.emplace(id, DmvRecord{id, {}, {}});
  extend_pool(trm, id, n, rng);
  certify(trm);
  records_.at(id).x_obu_history.push_back(trm.x_obu_);
  trm.registration_stale_ = true;
  return trm;
}

std::optional<EscrowPackage> Dmv::refill_pool(Trm& trm, const VehicleId& id,
                                              std::size_t n_more,
                                              DeterministicRng& rng) {
  if (n_more == 0) return std::nullopt;
  if (!records_.contains(id)) {
    throw Error(ErrorCode::kUnknownTarget, "vehicle not provisioned");
  }
  extend_pool(trm, id, n_more, rng);
  certify(trm);
  records_.at(id).x_obu_history.push_back(trm.x_obu_);
  trm.registration_stale_ = true;
  return escrow_keys(trm, rng);
}

Enrollment Dmv::enrollment(const Trm& trm) const {
  return Enrollment{trm.x_obu(), hash(trm.password())};
}

void Dmv::import_record(DmvRecord record) {
  if (records_.contains(record.id)) {
    throw Error(ErrorCode::kDuplicateVehicle,
                "vehicle " + to_hex(record.id) + " already provisioned");
  }
  const VehicleId id = record.id;
  records_.emplace(id, std::move(record));
}

const DmvRecord* Dmv::find(const VehicleId& id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

const DmvRecord* Dmv::find_by_x_obu(const Digest& x_obu) const {
  for (const auto& [id, rec] : records_) {
    if (std::find(rec.x_obu_history.begin(), rec.x_obu_history.end(), x_obu) !=
        rec.x_obu_history.end()) {
      return &rec;
    }
  }
  return nullptr;
}

}  // namespace olev
