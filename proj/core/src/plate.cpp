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

#include "olev/plate.hpp"

#include <algorithm>

#include "olev/error.hpp"
#include "olev/wire.hpp"

namespace olev {

namespace {

template <std::size_t N>
FixedBytes<N> to_fixed(ByteView v) {
  FixedBytes<N> out{};
  std::copy_n(v.begin(), N, out.begin());
  return out;
}

}  // namespace

PlateId plate_id_from_u32(std::uint32_t id) {
  return to_fixed<kPlateIdSize>(encode_be(id, kPlateIdSize));
}

Bytes DmaAuthRequest::encode() const {
  return concat(c1, c2.view(), c3.view(), h3.view());
}

DmaAuthRequest DmaAuthRequest::decode(ByteView wire) {
  if (wire.size() != kDmaAuthRequestSize) {
    throw Error(ErrorCode::kMalformedInput, "DMA request must be 296 bytes");
  }
  DmaAuthRequest r;
  r.c1 = to_bytes(wire.first(kPseudonymSize));
  r.c2 = Digest::from_bytes(wire.subspan(kPseudonymSize, kDigestSize));
  r.c3 = Digest::from_bytes(wire.subspan(kPseudonymSize + kDigestSize, kDigestSize));
  r.h3 = Digest::from_bytes(wire.last(kDigestSize));
  return r;
}

Bytes DmaAuthReply::encode() const {
  return concat(c4, c5, c6.view(), c7.view());
}

DmaAuthReply DmaAuthReply::decode(ByteView wire) {
  if (wire.size() != kDmaAuthReplySize) {
    throw Error(ErrorCode::kMalformedInput, "DMA reply must be 144 bytes");
  }
  DmaAuthReply r;
  r.c4 = to_fixed<kNonceSize>(wire.first(kNonceSize));
  r.c5 = to_fixed<kNonceSize>(wire.subspan(kNonceSize, kNonceSize));
  r.c6 = Digest::from_bytes(wire.subspan(2 * kNonceSize, kDigestSize));
  r.c7 = Digest::from_bytes(wire.last(kDigestSize));
  return r;
}

ChargingPlate::ChargingPlate(PlateConfig config)
    : config_(std::move(config)), wire_id_(plate_id_from_u32(config_.id)) {}

void ChargingPlate::begin_session() {
  attempts_ = 0;
  last_request_ts_.reset();
}

AuthResult<DmaAccepted> ChargingPlate::verify_dma_request(
    const DmaAuthRequest& req) {
  if (attempts_ >= kMaxTries) return AuthFailure::kTriesExhausted;
  ++attempts_;
  if (req.c1.size() != kPseudonymSize) return AuthFailure::kMalformed;

  const Digest h1 = auth_meter_.xor_digest(req.h3, msk_);
  const Digest h2 = auth_meter_.hash(h1.view());
  const Digest c1_mask = auth_meter_.hash(h2.view());
  const Bytes ps_bytes = auth_meter_.xor_mask(c1_mask, req.c1);
  const Digest h_ps = auth_meter_.hash(ps_bytes);
  const Digest x_obu = auth_meter_.xor_digest(req.c2, h_ps);
  if (!roster_.contains(x_obu)) return AuthFailure::kUnknownVehicle;
  const Digest c3 = auth_meter_.hash(concat(h_ps.view(), req.c2.view(), req.h3.view()));
  if (c3 != req.c3) return AuthFailure::kC3Mismatch;

  const Pseudonym ps = Pseudonym::decode(ps_bytes);
  if (!ps.verify(config_.dmv_public)) return AuthFailure::kBadSignature;
  return DmaAccepted{ps, x_obu, h1, h_ps};
}

std::pair<DmaAuthReply, SymmetricKey> ChargingPlate::build_dma_reply(
    const DmaAccepted& accepted, const FixedBytes<kNonceSize>& r_c) {
  DmaAuthReply reply;
  reply.c4 = to_fixed<kNonceSize>(auth_meter_.xor_bytes(wire_id_, r_c));
  const Digest h2_ps = auth_meter_.hash(accepted.h_ps.view());
  reply.c5 = to_fixed<kNonceSize>(auth_meter_.xor_mask(h2_ps, r_c));
  reply.c6 = auth_meter_.hash(concat(r_c, reply.c4, reply.c5));

  reply.c7 = session_meter_.xor_digest(accepted.h1, h2_ps);
  const Digest sk = session_meter_.hash(concat(accepted.pseudonym.encode(), r_c));
  return {reply, SymmetricKey::from_digest(sk)};
}

AuthResult<DmaChargeAck> ChargingPlate::handle_charging_request_dma(
    const DmaSession& session, ByteView encrypted, SimTime now) {
  constexpr std::size_t kFrame =
      kTimestampSize + kRequestCodeSize + kPseudonymSize + kDigestSize;
  if (encrypted.size() != kFrame) return AuthFailure::kMalformed;
  const Bytes frame = stream_xcrypt(session.session_key, wire_id_, encrypted);
  const ByteView f(frame);
  const ByteView ts_bytes = f.first(kTimestampSize);
  const ByteView ps_bytes = f.subspan(kTimestampSize + 1, kPseudonymSize);
  if (f[kTimestampSize] != kChargingRequestCode ||
      !std::equal(ps_bytes.begin(), ps_bytes.end(),
                  session.pseudonym.encode().begin())) {
    return AuthFailure::kDecryptFailed;
  }
  const SimTime ts = decode_timestamp(ts_bytes);
  const SimTime age = now - ts;
  if (age < SimTime::zero() || age > config_.freshness_window) {
    return AuthFailure::kStaleTimestamp;
  }
  if (last_request_ts_ && ts <= *last_request_ts_) return AuthFailure::kReplay;
  last_request_ts_ = ts;

  const Digest mac = Digest::from_bytes(f.last(kDigestSize));
  audit_tokens_.push_back(mac);
  Bytes ack{kAckCode};
  append(ack, ts_bytes);
  append(ack, ps_bytes);
  append(ack, mac.view());
  return DmaChargeAck{std::move(ack), ts, mac};
}

AuthResult<ElGamalCiphertext> ChargingPlate::relay_pha(Cspa& cspa,
                                                       const Digest& member,
                                                       const Digest& x_obu,
                                                       SimTime now,
                                                       DeterministicRng& rng) {
  if (!link_up_) return AuthFailure::kLinkDown;
  return cspa.verify_and_rotate(x_obu, member, now, rng);
}

AuthResult<PhaChargeReply> ChargingPlate::relay_pha_charging_request(
    Cspa& cspa, const Digest& x_obu, ByteView encrypted, SimTime now) {
  if (!link_up_) return AuthFailure::kLinkDown;
  return cspa.handle_pha_charging_request(x_obu, wire_id_, encrypted, now,
                                          config_.freshness_window);
}

std::optional<BillingEntry> ChargingPlate::transfer_and_bill(
    const Digest& x_obu, const std::optional<Pseudonym>& pseudonym,
    SimTime time_available, SimTime now) {
  if (time_available < config_.charge_time) return std::nullopt;
  ++energy_quanta_;
  const std::int64_t cost = config_.behavior == Behavior::kDeviate
                                ? 2 * config_.unit_cost
                                : config_.unit_cost;
  return BillingEntry{now, x_obu, pseudonym, config_.id, cost};
}

}  // namespace olev
