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

#include "olev/obu.hpp"

#include <algorithm>

#include "olev/error.hpp"
#include "olev/wire.hpp"

namespace olev {

void ObuBillLog::append(const BillingEntry& entry) {
  entries_.push_back(entry);
  total_ += entry.cost;
}

ChainState make_chain(const Pseudonym& seed, std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "chain length must be >= 1");
  ChainState c{seed, {}, n, n};
  c.links.resize(n + 1);
  Digest d = hash(seed.encode());
  c.links[1] = d;
  for (std::uint64_t i = 2; i <= n; ++i) {
    d = hash(d.view());
    c.links[i] = d;
  }
  return c;
}

ObuAgent::ObuAgent(VehicleId id, Trm trm, std::int64_t unit_cost,
                   BatteryPolicy battery)
    : id_(id), trm_(std::move(trm)), unit_cost_(unit_cost), battery_(battery) {}

std::optional<Pseudonym> ObuAgent::rotate_pseudonym() {
  auto ps = trm_.take_pseudonym();
  if (!ps) return std::nullopt;
  active_ = ps;
  used_.push_back(*ps);
  return ps;
}

void ObuAgent::install_dma_credentials(const DmaCredentials& creds) {
  credentials_ = creds;
  trm_.mark_registered();
}

DmaAuthRequest ObuAgent::build_dma_request(const Pseudonym& ps) {
  if (!credentials_ || credentials_->x_obu != trm_.x_obu()) {
    throw Error(ErrorCode::kNotRegistered,
                "no DMA registration for the current X_OBU");
  }
  const Bytes ps_bytes = ps.encode();
  DmaAuthRequest req;
  req.c1 = auth_meter_.xor_mask(auth_meter_.hash(credentials_->h2.view()), ps_bytes);
  const Digest h_ps = auth_meter_.hash(ps_bytes);
  req.c2 = auth_meter_.xor_digest(h_ps, trm_.x_obu());
  req.c3 = auth_meter_.hash(concat(h_ps.view(), req.c2.view(), credentials_->h3.view()));
  req.h3 = credentials_->h3;
  pending_ = PendingDma{ps, h_ps};
  return req;
}

AuthResult<SymmetricKey> ObuAgent::finalize_dma(const DmaAuthReply& reply) {
  if (!pending_) return AuthFailure::kMalformed;
  const Digest h2_ps = session_meter_.hash(pending_->h_ps.view());
  const Bytes r_c = session_meter_.xor_mask(h2_ps, reply.c5);
  const Digest c6 = session_meter_.hash(concat(r_c, reply.c4, reply.c5));
  if (c6 != reply.c6) {
    pending_.reset();
    return AuthFailure::kC6Mismatch;
  }
  const SymmetricKey sk = SymmetricKey::from_digest(
      session_meter_.hash(concat(pending_->ps.encode(), r_c)));
  h1_ = session_meter_.xor_digest(reply.c7, h2_ps);
  session_key_ = sk;
  pending_.reset();
  return sk;
}

Digest ObuAgent::start_chain(const Pseudonym& ps, std::uint64_t n) {
  chain_ = make_chain(ps, n);
  session_key_.reset();
  return chain_->head();
}

AuthResult<Digest> ObuAgent::next_chain_member() const {
  if (!chain_) return AuthFailure::kNotRegistered;
  if (chain_->cursor <= 1) return AuthFailure::kChainExhausted;
  return chain_->links[chain_->cursor - 1];
}

void ObuAgent::confirm_chain_member() {
  if (chain_ && chain_->cursor > 1) --chain_->cursor;
}

AuthResult<SymmetricKey> ObuAgent::accept_pha_session(
    const ElGamalCiphertext& sealed) {
  auth_meter_.count_dec();
  try {
    session_key_ = trm_.open_session_key(sealed);
  } catch (const Error&) {
    return AuthFailure::kDecryptFailed;
  }
  return *session_key_;
}

Bytes ObuAgent::charging_frame(Protocol protocol, SimTime ts) const {
  Bytes body = encode_timestamp(ts);
  body.push_back(kChargingRequestCode);
  if (protocol == Protocol::kDma) {
    if (!active_) {
      throw Error(ErrorCode::kInvalidArgument, "no active pseudonym");
    }
    append(body, active_->encode());
  } else {
    append(body, trm_.x_obu().view());
  }
  const Digest mac = trm_.mac_kv(body);
  append(body, mac.view());
  return body;
}

std::optional<Bytes> ObuAgent::build_charging_request(Protocol protocol,
                                                      SimTime ts,
                                                      const PlateId& plate) {
  if (!session_key_) {
    throw Error(ErrorCode::kNoSessionKey, "no session key established");
  }
  if (!consents()) return std::nullopt;
  return stream_xcrypt(*session_key_, plate, charging_frame(protocol, ts));
}

void ObuAgent::log_bill(const BillingEntry& billed) {
  BillingEntry own = billed;
  own.cost = unit_cost_;
  log_.append(own);
}

}  // namespace olev
