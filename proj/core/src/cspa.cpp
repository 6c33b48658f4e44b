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

#include "olev/cspa.hpp"

#include <nlohmann/json.hpp>

#include "olev/error.hpp"
#include "olev/wire.hpp"

namespace olev {

std::vector<MskEpoch> init_msk(ByteView seed, std::uint64_t l,
                               SimTime duration) {
  if (l == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one MSK");
  if (duration <= SimTime::zero()) {
    throw Error(ErrorCode::kInvalidArgument, "epoch duration must be positive");
  }
  std::vector<MskEpoch> out;
  out.reserve(l);
  Digest msk = hash(seed);
  for (std::uint64_t i = 1; i <= l; ++i) {
    if (i > 1) msk = hash(msk.view());
    const auto begin = duration * static_cast<std::int64_t>(i - 1);
    out.push_back(MskEpoch{i, msk, begin, begin + duration});
  }
  return out;
}

std::optional<MskEpoch> epoch_at(const std::vector<MskEpoch>& epochs,
                                 SimTime t) {
  for (const auto& e : epochs) {
    if (t >= e.begin && t < e.end) return e;
  }
  return std::nullopt;
}

std::string to_json_lines(const std::vector<BillingEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::json j;
    j["ts"] = e.timestamp.count();
    j["x_obu_hex"] = e.x_obu.hex();
    if (e.pseudonym) j["ps_hex"] = to_hex(e.pseudonym->encode());
    j["plate"] = e.plate;
    j["cost"] = e.cost;
    out += j.dump();
    out += '\n';
  }
  return out;
}

// BillingLedger -------------------------------------------------------------

void BillingLedger::append(const BillingEntry& entry) {
  entries_.push_back(entry);
  totals_[entry.x_obu] += entry.cost;
}

std::int64_t BillingLedger::total(const Digest& x_obu) const {
  auto it = totals_.find(x_obu);
  return it == totals_.end() ? 0 : it->second;
}

std::map<Digest, std::int64_t> BillingLedger::recompute_totals() const {
  std::map<Digest, std::int64_t> out;
  for (const auto& e : entries_) out[e.x_obu] += e.cost;
  return out;
}

// Cspa -------------------------------------------------------------------

Cspa::Cspa(Bytes secret_seed, std::uint64_t epochs, SimTime epoch_duration,
           std::int64_t unit_cost, GroupElement dmv_public)
    : seed_(std::move(secret_seed)),
      epochs_(init_msk(seed_, epochs, epoch_duration)),
      unit_cost_(unit_cost),
      dmv_public_(dmv_public) {
  if (unit_cost <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "unit cost must be positive");
  }
}

std::optional<MskEpoch> Cspa::epoch_at(SimTime t) const {
  return olev::epoch_at(epochs_, t);
}

void Cspa::enroll(const Enrollment& e) { enrolled_[e.x_obu] = e.password_digest; }

DmaCredentials Cspa::register_dma(ByteView password, const Digest& x_obu,
                                  std::uint64_t epoch) {
  auto it = enrolled_.find(x_obu);
  if (it == enrolled_.end()) {
    throw Error(ErrorCode::kNotRegistered, "X_OBU not enrolled by the DMV");
  }
  if (hash(password) != it->second) {
    throw Error(ErrorCode::kBadPassword, "PWD_OBU rejected");
  }
  if (epoch == 0 || epoch > epochs_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "no such MSK epoch");
  }
  if (auto reg = dma_.find(x_obu); reg != dma_.end() && reg->second.epoch == epoch) {
    return DmaCredentials{x_obu, reg->second.h2, reg->second.h3, epoch};
  }
  const Digest h1 = hash(concat(seed_, x_obu.view()));
  const Digest h2 = hash(h1.view());
  const Digest h3 = epochs_[epoch - 1].msk ^ h1;
  dma_[x_obu] = DmaRegistration{x_obu, h1, h2, h3, epoch};
  return DmaCredentials{x_obu, h2, h3, epoch};
}

const DmaRegistration* Cspa::dma_registration(const Digest& x_obu) const {
  auto it = dma_.find(x_obu);
  return it == dma_.end() ? nullptr : &it->second;
}

std::set<Digest> Cspa::roster() const {
  std::set<Digest> out;
  for (const auto& [x, reg] : dma_) out.insert(x);
  return out;
}

const ChainRegistration& Cspa::register_chain(const Digest& x_obu,
                                              ByteView head,
                                              const ObuCertificate& cert,
                                              std::uint64_t n) {
  if (head.size() != kDigestSize) {
    throw Error(ErrorCode::kMalformedInput, "chain head must be 64 bytes");
  }
  if (!enrolled_.contains(x_obu)) {
    throw Error(ErrorCode::kNotRegistered, "X_OBU not enrolled by the DMV");
  }
  if (cert.x_obu != x_obu || !cert.verify(dmv_public_)) {
    throw Error(ErrorCode::kInvalidCertificate, "Cert_OBU does not verify");
  }
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "a chain of length n allows n - 1 uses; n must be >= 2");
  }
  const Digest h = Digest::from_bytes(head);
  consumed_[x_obu].insert(h);
  auto& reg = chains_[x_obu];
  reg = ChainRegistration{x_obu, h, n - 1, cert, std::nullopt};
  return reg;
}

const ChainRegistration* Cspa::chain(const Digest& x_obu) const {
  auto it = chains_.find(x_obu);
  return it == chains_.end() ? nullptr : &it->second;
}

AuthResult<ElGamalCiphertext> Cspa::verify_and_rotate(const Digest& x_obu,
                                                      const Digest& member,
                                                      SimTime timestamp,
                                                      DeterministicRng& rng) {
  auto it = chains_.find(x_obu);
  if (it == chains_.end()) return AuthFailure::kNotRegistered;
  ChainRegistration& reg = it->second;
  if (consumed_[x_obu].contains(member)) return AuthFailure::kReplay;
  if (reg.remaining == 0) return AuthFailure::kChainExhausted;
  if (pha_meter_.hash(member.view()) != reg.head) {
    return AuthFailure::kChainMismatch;
  }
  reg.head = member;
  --reg.remaining;
  consumed_[x_obu].insert(member);

  if (!reg.session_key) {
    reg.session_key = rng.key();
    session_keys_.push_back(SessionKeyRecord{x_obu, timestamp});
  }
  pha_meter_.count_enc();
  return elgamal_encrypt(reg.certificate.obu_public, reg.session_key->view(),
                         rng.scalar());
}

AuthResult<PhaChargeReply> Cspa::handle_pha_charging_request(
    const Digest& x_obu, ByteView nonce, ByteView encrypted_frame, SimTime now,
    SimTime freshness_window) {
  auto it = chains_.find(x_obu);
  if (it == chains_.end() || !it->second.session_key) {
    return AuthFailure::kNotRegistered;
  }
  if (encrypted_frame.size() != kPhaChargeFrameSize) return AuthFailure::kMalformed;
  const Bytes frame =
      stream_xcrypt(*it->second.session_key, nonce, encrypted_frame);
  const ByteView f(frame);
  const SimTime ts = decode_timestamp(f.first(kTimestampSize));
  if (f[kTimestampSize] != kChargingRequestCode ||
      Digest::from_bytes(f.subspan(kTimestampSize + 1, kDigestSize)) != x_obu) {
    return AuthFailure::kDecryptFailed;
  }
  const SimTime age = now - ts;
  if (age < SimTime::zero() || age > freshness_window) {
    return AuthFailure::kStaleTimestamp;
  }
  if (auto last = last_request_.find(x_obu);
      last != last_request_.end() && ts <= last->second) {
    return AuthFailure::kReplay;
  }
  last_request_[x_obu] = ts;
  const ByteView mac = f.last(kDigestSize);
  return PhaChargeReply{concat(f.first(kTimestampSize), x_obu.view(), mac)};
}

BillStatus Cspa::record_bill(const BillingEntry& entry) {
  if (entry.cost != unit_cost_) {
    flags_.push_back(MisbehaviorFlag{"plate", entry.plate, entry.x_obu,
                                     entry.timestamp, "non_unit_cost"});
    return BillStatus::kRejectedNonUnitCost;
  }
  ledger_.append(entry);
  return BillStatus::kRecorded;
}

std::vector<Pseudonym> Cspa::scan_pseudonym_reuse(
    const std::function<std::uint32_t(std::uint32_t)>& section_of) const {
  std::map<Bytes, std::set<std::uint32_t>> sections;
  std::map<Bytes, Pseudonym> by_bytes;
  for (const auto& e : ledger_.entries()) {
    if (!e.pseudonym) continue;
    const Bytes key = e.pseudonym->encode();
    sections[key].insert(section_of(e.plate));
    by_bytes.emplace(key, *e.pseudonym);
  }
  std::vector<Pseudonym> out;
  for (const auto& [key, secs] : sections) {
    if (secs.size() > 1) out.push_back(by_bytes.at(key));
  }
  return out;
}

}  // namespace olev
