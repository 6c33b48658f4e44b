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

#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "olev/error.hpp"
#include "olev/metrics.hpp"
#include "olev/obu.hpp"
#include "olev/plate.hpp"
#include "olev/revocation.hpp"
#include "olev/wire.hpp"

namespace olev {
namespace {

using testing::DmaBench;

FixedBytes<kNonceSize> nonce(DeterministicRng& rng) {
  FixedBytes<kNonceSize> r{};
  const Bytes b = rng.bytes(kNonceSize);
  std::copy(b.begin(), b.end(), r.begin());
  return r;
}

struct Handshake {
  Pseudonym ps;
  DmaAuthRequest req;
  DmaAccepted accepted;
  DmaAuthReply reply;
  SymmetricKey cp_key;
  SymmetricKey obu_key;
  FixedBytes<kNonceSize> r_c{};
};

Handshake handshake(DmaBench& b, ObuAgent& obu) {
  Handshake h;
  h.ps = *obu.rotate_pseudonym();
  obu.reset_meters();
  b.plate->reset_meters();
  b.plate->begin_session();
  h.req = obu.build_dma_request(h.ps);
  auto acc = b.plate->verify_dma_request(h.req);
  REQUIRE(acc.ok());
  h.accepted = acc.value();
  h.r_c = nonce(b.rng);
  auto [reply, sk] = b.plate->build_dma_reply(h.accepted, h.r_c);
  h.reply = reply;
  h.cp_key = sk;
  auto fin = obu.finalize_dma(reply);
  REQUIRE(fin.ok());
  h.obu_key = fin.value();
  return h;
}

TEST_CASE("DMA handshake: PS extraction, equal keys, H1 recovery, op counts") {
  DmaBench b(60);
  for (int v = 0; v < 50; ++v) {
    ObuAgent& obu = b.add_vehicle();
    const Handshake h = handshake(b, obu);
    CHECK(h.accepted.pseudonym == h.ps);
    CHECK(h.accepted.x_obu == obu.x_obu());
    CHECK(h.obu_key == h.cp_key);
    CHECK(h.cp_key == SymmetricKey::from_digest(hash(concat(h.ps.encode(), h.r_c))));
    REQUIRE(obu.stored_h1().has_value());
    CHECK(*obu.stored_h1() == b.cspa->dma_registration(obu.x_obu())->h1);

    CHECK(obu.auth_meter().counts() == expected_dma_counts(Role::kObu));
    CHECK(b.plate->auth_meter().counts() == expected_dma_counts(Role::kCp));

    // c4 ^ r_c = ID_cp
    CHECK(xor_equal(h.reply.c4, h.r_c) == to_bytes(b.plate->wire_id()));
  }
}

TEST_CASE("DMA request: sizes, determinism, wire round trip") {
  DmaBench b(61);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym ps = *obu.rotate_pseudonym();
  const DmaAuthRequest r1 = obu.build_dma_request(ps);
  const DmaAuthRequest r2 = obu.build_dma_request(ps);
  CHECK(r1 == r2);
  CHECK(r1.encode().size() == 296);
  CHECK(DmaAuthRequest::decode(r1.encode()) == r1);
  CHECK_THROWS_AS(DmaAuthRequest::decode(Bytes(295)), Error);

  b.plate->begin_session();
  auto acc = b.plate->verify_dma_request(r1);
  REQUIRE(acc.ok());
  const auto [reply, sk] = b.plate->build_dma_reply(acc.value(), nonce(b.rng));
  CHECK(reply.encode().size() == 144);
  CHECK(DmaAuthReply::decode(reply.encode()) == reply);
}

TEST_CASE("every single-bit flip in c3 is rejected") {
  DmaBench b(62);
  ObuAgent& obu = b.add_vehicle();
  const DmaAuthRequest req = obu.build_dma_request(*obu.rotate_pseudonym());
  int accepted = 0;
  for (std::size_t bit = 0; bit < 512; ++bit) {
    DmaAuthRequest t = req;
    t.c3.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    b.plate->begin_session();
    auto r = b.plate->verify_dma_request(t);
    if (r.ok()) ++accepted;
    else CHECK(r.failure() == AuthFailure::kC3Mismatch);
  }
  CHECK(accepted == 0);
}

TEST_CASE("bit flips in c1, c2 and H3 are rejected") {
  DmaBench b(63);
  ObuAgent& obu = b.add_vehicle();
  const DmaAuthRequest req = obu.build_dma_request(*obu.rotate_pseudonym());
  int accepted = 0;
  for (int trial = 0; trial < 300; ++trial) {
    DmaAuthRequest t = req;
    const std::uint64_t r = b.rng.next_u64();
    const auto flip = static_cast<std::uint8_t>(1u << (r % 8));
    switch (trial % 3) {
      case 0: t.c1[(r >> 8) % t.c1.size()] ^= flip; break;
      case 1: t.c2.bytes[(r >> 8) % 64] ^= flip; break;
      default: t.h3.bytes[(r >> 8) % 64] ^= flip; break;
    }
    b.plate->begin_session();
    if (b.plate->verify_dma_request(t).ok()) ++accepted;
  }
  CHECK(accepted == 0);
}

TEST_CASE("random requests are never accepted") {
  DmaBench b(64);
  (void)b.add_vehicle();
  int accepted = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const DmaAuthRequest t = DmaAuthRequest::decode(b.rng.bytes(kDmaAuthRequestSize));
    b.plate->begin_session();
    if (b.plate->verify_dma_request(t).ok()) ++accepted;
  }
  CHECK(accepted == 0);
}

TEST_CASE("H3 from a stale MSK epoch is rejected") {
  DmaBench b(65);
  ObuAgent& obu = b.add_vehicle();  // registered for epoch 1
  b.plate->install_msk(b.cspa->epochs()[1].msk);
  b.plate->begin_session();
  CHECK_FALSE(b.plate->verify_dma_request(obu.build_dma_request(*obu.rotate_pseudonym())).ok());

  // Re-registering for the plate's epoch restores the handshake.
  obu.install_dma_credentials(b.cspa->register_dma(obu.trm().password(), obu.x_obu(), 2));
  b.plate->begin_session();
  CHECK(b.plate->verify_dma_request(obu.build_dma_request(*obu.rotate_pseudonym())).ok());
}

TEST_CASE("vehicle missing from the roster is rejected") {
  DmaBench b(66);
  ObuAgent& obu = b.add_vehicle();
  b.plate->update_roster({});
  b.plate->begin_session();
  auto r = b.plate->verify_dma_request(obu.build_dma_request(*obu.rotate_pseudonym()));
  CHECK(r.failure() == AuthFailure::kUnknownVehicle);
}

TEST_CASE("the try counter stops at 3 per session") {
  DmaBench b(67);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym ps = *obu.rotate_pseudonym();
  DmaAuthRequest bad = obu.build_dma_request(ps);
  bad.c3.bytes[0] ^= 1;
  b.plate->begin_session();
  for (int i = 0; i < kMaxTries; ++i) {
    CHECK(b.plate->verify_dma_request(bad).failure() == AuthFailure::kC3Mismatch);
    CHECK(b.plate->attempts() == i + 1);
  }
  auto fourth = b.plate->verify_dma_request(obu.build_dma_request(ps));
  CHECK(fourth.failure() == AuthFailure::kTriesExhausted);
  CHECK(b.plate->attempts() == kMaxTries);
  b.plate->begin_session();
  CHECK(b.plate->verify_dma_request(obu.build_dma_request(ps)).ok());
}

TEST_CASE("a bit flip in c5 or c6 fails the OBU's c6 check") {
  DmaBench b(68);
  ObuAgent& obu = b.add_vehicle();
  for (int field = 0; field < 2; ++field) {
    const Pseudonym ps = *obu.rotate_pseudonym();
    b.plate->begin_session();
    auto acc = b.plate->verify_dma_request(obu.build_dma_request(ps));
    REQUIRE(acc.ok());
    auto [reply, sk] = b.plate->build_dma_reply(acc.value(), nonce(b.rng));
    if (field == 0) reply.c5[3] ^= 0x10;
    else reply.c6.bytes[17] ^= 0x01;
    CHECK(obu.finalize_dma(reply).failure() == AuthFailure::kC6Mismatch);
    CHECK_FALSE(obu.session_key().has_value());
  }
}

TEST_CASE("a reply built from the wrong h(PS) fails mutual auth") {
  DmaBench b(69);
  ObuAgent& obu = b.add_vehicle();
  // A reply built without h(PS) cannot carry a valid c6.
  const Pseudonym ps = *obu.rotate_pseudonym();
  b.plate->begin_session();
  auto acc = b.plate->verify_dma_request(obu.build_dma_request(ps));
  REQUIRE(acc.ok());
  DmaAccepted forged = acc.value();
  forged.h_ps = hash(Bytes{0x00});
  auto [reply, sk] = b.plate->build_dma_reply(forged, nonce(b.rng));
  CHECK_FALSE(obu.finalize_dma(reply).ok());
}

TEST_CASE("build_dma_request needs credentials for the current X_OBU") {
  DmaBench b(70);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym ps = *obu.rotate_pseudonym();
  (void)b.dmv->refill_pool(obu.trm(), obu.id(), 2, b.rng);
  try {
    (void)obu.build_dma_request(ps);
    FAIL("stale credentials accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotRegistered);
  }
}

TEST_CASE("finalize without a pending request is malformed") {
  DmaBench b(71);
  ObuAgent& obu = b.add_vehicle();
  CHECK(obu.finalize_dma(DmaAuthReply{}).failure() == AuthFailure::kMalformed);
}

TEST_CASE("DMA charging request: 175-byte frame, ack, replay and freshness") {
  DmaBench b(72);
  ObuAgent& obu = b.add_vehicle();
  const Handshake h = handshake(b, obu);
  const DmaSession session{h.ps, obu.x_obu(), h.cp_key};

  const SimTime ts(1'000'000);
  CHECK(obu.charging_frame(Protocol::kDma, ts).size() == 175);
  CHECK(obu.charging_frame(Protocol::kDma, ts).size() ==
        message_size(Protocol::kDma, MessageType::kChargingRequest, kPseudonymSize));
  const auto enc = obu.build_charging_request(Protocol::kDma, ts, b.plate->wire_id());
  REQUIRE(enc.has_value());
  CHECK(enc->size() == 175);

  auto ack = b.plate->handle_charging_request_dma(session, *enc, ts + SimTime(10));
  REQUIRE(ack.ok());
  CHECK(ack.value().frame[0] == kAckCode);
  CHECK(ack.value().timestamp == ts);
  const Bytes echoed(ack.value().frame.begin() + 7, ack.value().frame.begin() + 7 + 104);
  CHECK(echoed == h.ps.encode());
  CHECK(b.plate->audit_tokens().size() == 1);

  auto replay = b.plate->handle_charging_request_dma(session, *enc, ts + SimTime(20));
  CHECK(replay.failure() == AuthFailure::kReplay);

  const SimTime old(10);
  const auto stale = obu.build_charging_request(Protocol::kDma, old, b.plate->wire_id());
  auto r = b.plate->handle_charging_request_dma(session, *stale, ts + SimTime(30));
  CHECK(r.failure() == AuthFailure::kStaleTimestamp);
}

TEST_CASE("DMA charging request under the wrong session key is rejected") {
  DmaBench b(73);
  ObuAgent& obu = b.add_vehicle();
  const Handshake h = handshake(b, obu);
  int accepted = 0;
  for (int i = 0; i < 100; ++i) {
    const DmaSession wrong{h.ps, obu.x_obu(), b.rng.key()};
    b.plate->begin_session();
    const SimTime ts(5000 + i);
    const auto enc = obu.build_charging_request(Protocol::kDma, ts, b.plate->wire_id());
    if (b.plate->handle_charging_request_dma(wrong, *enc, ts).ok()) ++accepted;
  }
  CHECK(accepted == 0);
}

TEST_CASE("the charging MAC verifies under K_V recovered by revocation") {
  DmaBench b(74);
  RevocationAuthorities ras(b.shares, 3);
  ObuAgent& obu = b.add_vehicle();
  const EscrowPackage pkg = escrow_keys(obu.trm(), b.rng);
  ras.store_escrow(pkg);
  const Handshake h = handshake(b, obu);
  const SimTime ts(42'000);
  const auto enc = obu.build_charging_request(Protocol::kDma, ts, b.plate->wire_id());
  auto ack = b.plate->handle_charging_request_dma(
      DmaSession{h.ps, obu.x_obu(), h.cp_key}, *enc, ts);
  REQUIRE(ack.ok());

  const std::vector<std::uint32_t> who{2, 4, 5};
  const Scalar x = ras.collude_reconstruct(who, Warrant{"case-mac", h.ps.encode(), "court"});
  const auto [k_sym, k_v] = open_trapdoor(x, pkg.trapdoor);
  Bytes alpha = encode_timestamp(ts);
  alpha.push_back(kChargingRequestCode);
  append(alpha, h.ps.encode());
  CHECK(keyed_hash(k_v, alpha) == ack.value().mac);
  CHECK(keyed_hash(k_sym, alpha) != ack.value().mac);
}

TEST_CASE("no consent, no request; no session key throws") {
  DeterministicRng rng(75);
  auto [dmv, shares] = Dmv::init_system(3, 2, rng);
  Trm trm = dmv.provision_trm(vehicle_id_from_u64(1), 2, rng);
  ObuAgent full(vehicle_id_from_u64(1), std::move(trm), 1, BatteryPolicy{0.95, 0.9, 0.01});
  CHECK_FALSE(full.consents());
  try {
    (void)full.build_charging_request(Protocol::kPha, SimTime(1), plate_id_from_u32(1));
    FAIL("no session key accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoSessionKey);
  }
  const Pseudonym seed = *full.rotate_pseudonym();
  (void)full.start_chain(seed, 4);
  // Any key works to get past the session check.
  const ElGamalCiphertext sealed = elgamal_encrypt(
      full.trm().obu_public(), rng.key().view(), rng.scalar());
  REQUIRE(full.accept_pha_session(sealed).ok());
  CHECK_FALSE(full.build_charging_request(Protocol::kPha, SimTime(1), plate_id_from_u32(1)).has_value());
}

TEST_CASE("battery consent follows the threshold") {
  DeterministicRng rng(76);
  auto [dmv, shares] = Dmv::init_system(3, 2, rng);
  ObuAgent obu(vehicle_id_from_u64(1), dmv.provision_trm(vehicle_id_from_u64(1), 1, rng), 1,
               BatteryPolicy{0.85, 0.9, 0.02});
  CHECK(obu.consents());
  obu.receive_energy();
  obu.receive_energy();
  obu.receive_energy();
  CHECK_FALSE(obu.consents());
}

TEST_CASE("PHA relay: honest member, garbage member, link down") {
  DmaBench b(77);
  ObuAgent& obu = b.add_vehicle();
  const Digest head = obu.start_chain(*obu.rotate_pseudonym(), 8);
  (void)b.cspa->register_chain(obu.x_obu(), head.view(), obu.trm().certificate(), 8);

  auto garbage = b.plate->relay_pha(*b.cspa, hash(Bytes{9}), obu.x_obu(), SimTime(1), b.rng);
  CHECK(garbage.failure() == AuthFailure::kChainMismatch);

  b.plate->set_link_up(false);
  auto down = b.plate->relay_pha(*b.cspa, obu.next_chain_member().value(), obu.x_obu(),
                                 SimTime(2), b.rng);
  CHECK(down.failure() == AuthFailure::kLinkDown);
  CHECK(b.cspa->chain(obu.x_obu())->remaining == 7);
  b.plate->set_link_up(true);

  auto sealed = b.plate->relay_pha(*b.cspa, obu.next_chain_member().value(), obu.x_obu(),
                                   SimTime(3), b.rng);
  REQUIRE(sealed.ok());
  obu.confirm_chain_member();
  CHECK(obu.chain()->cursor == 7);
  auto sk = obu.accept_pha_session(sealed.value());
  REQUIRE(sk.ok());
  CHECK(obu.auth_meter().counts().dec == 1);

  const SimTime ts(50'000);
  const auto req = obu.build_charging_request(Protocol::kPha, ts, b.plate->wire_id());
  REQUIRE(req.has_value());
  CHECK(req->size() == 135);
  CHECK(req->size() == kPhaChargeFrameSize);
  auto reply = b.plate->relay_pha_charging_request(*b.cspa, obu.x_obu(), *req, ts + SimTime(5));
  REQUIRE(reply.ok());
  CHECK(reply.value().frame.size() == 134);
  auto replay = b.plate->relay_pha_charging_request(*b.cspa, obu.x_obu(), *req, ts + SimTime(6));
  CHECK(replay.failure() == AuthFailure::kReplay);

  b.plate->set_link_up(false);
  const auto req2 = obu.build_charging_request(Protocol::kPha, ts + SimTime(10), b.plate->wire_id());
  CHECK(b.plate->relay_pha_charging_request(*b.cspa, obu.x_obu(), *req2, ts + SimTime(11))
            .failure() == AuthFailure::kLinkDown);
}

TEST_CASE("a session key sealed to another OBU cannot be opened") {
  DmaBench b(78);
  ObuAgent& a = b.add_vehicle();
  ObuAgent& other = b.add_vehicle();
  const ElGamalCiphertext sealed =
      elgamal_encrypt(other.trm().obu_public(), b.rng.key().view(), b.rng.scalar());
  auto r = a.accept_pha_session(sealed);
  // Decryption with the wrong key yields some 32 bytes, never the sealed key.
  if (r.ok()) {
    CHECK_FALSE(r.value() == other.accept_pha_session(sealed).value());
  }
}

TEST_CASE("make_chain: links are successive hashes of the seed") {
  DmaBench b(79);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym ps = *obu.rotate_pseudonym();
  const ChainState c = make_chain(ps, 8);
  for (std::uint64_t i = 1; i <= 8; ++i) {
    CHECK(c.links[i].to_vector() == hash_chain(ps.encode(), i));
  }
  CHECK(c.head() == c.links[8]);
  CHECK(c.remaining() == 7);
  CHECK_THROWS_AS(make_chain(ps, 0), Error);
}

TEST_CASE("chain cursor h^4 emits h^3; h^1 is exhausted") {
  DmaBench b(80);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym ps = *obu.rotate_pseudonym();
  CHECK(obu.next_chain_member().failure() == AuthFailure::kNotRegistered);
  (void)obu.start_chain(ps, 4);
  CHECK(obu.next_chain_member().value().to_vector() == hash_chain(ps.encode(), 3));
  obu.confirm_chain_member();
  obu.confirm_chain_member();
  obu.confirm_chain_member();
  CHECK(obu.chain()->cursor == 1);
  CHECK(obu.next_chain_member().failure() == AuthFailure::kChainExhausted);
}

TEST_CASE("transfer_and_bill: unit cost, deviation doubles, short time skips") {
  DmaBench b(81);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym ps = *obu.rotate_pseudonym();
  auto bill = b.plate->transfer_and_bill(obu.x_obu(), ps, SimTime(60'000), SimTime(100));
  REQUIRE(bill.has_value());
  CHECK(bill->cost == 1);
  CHECK(bill->plate == 7);
  CHECK(bill->pseudonym == ps);
  CHECK(b.plate->energy_delivered() == 1);

  CHECK_FALSE(b.plate->transfer_and_bill(obu.x_obu(), ps, SimTime(49'999), SimTime(200)).has_value());
  CHECK(b.plate->energy_delivered() == 1);

  b.plate->set_behavior(Behavior::kDeviate);
  auto over = b.plate->transfer_and_bill(obu.x_obu(), std::nullopt, SimTime(50'000), SimTime(300));
  REQUIRE(over.has_value());
  CHECK(over->cost == 2);
  CHECK(b.cspa->record_bill(*over) == BillStatus::kRejectedNonUnitCost);
  CHECK(b.cspa->flags().size() == 1);
}

TEST_CASE("OBU bill log: totals and its own unit cost") {
  DmaBench b(82);
  ObuAgent& obu = b.add_vehicle();
  CHECK(obu.bill_log().total() == 0);
  CHECK(obu.bill_log().entries().empty());
  for (int i = 0; i < 5; ++i) {
    obu.log_bill(BillingEntry{SimTime(i), obu.x_obu(), std::nullopt, 1, 1});
  }
  CHECK(obu.bill_log().total() == 5);
  obu.log_bill(BillingEntry{SimTime(9), obu.x_obu(), std::nullopt, 2, 2});
  CHECK(obu.bill_log().total() == 6);
  CHECK(obu.bill_log().entries().back().cost == 1);
}

TEST_CASE("pseudonyms rotate without reuse until the pool drains") {
  DmaBench b(83);
  ObuAgent& obu = b.add_vehicle(5);
  std::vector<Pseudonym> seen;
  while (auto ps = obu.rotate_pseudonym()) {
    for (const auto& s : seen) CHECK_FALSE(s == *ps);
    seen.push_back(*ps);
  }
  CHECK(seen.size() == 5);
  CHECK(obu.used_pseudonyms() == seen);
}

}  // namespace
}  // namespace olev
