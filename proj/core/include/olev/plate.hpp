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

#ifndef OLEV_PLATE_HPP_
#define OLEV_PLATE_HPP_

// Charging plate: local DMA verification and session setup, PHA relay to the
// CSPA, power delivery and bill emission.

#include <cstdint>
#include <optional>
#include <set>

#include "olev/auth.hpp"
#include "olev/crypto.hpp"
#include "olev/cspa.hpp"
#include "olev/dmv.hpp"
#include "olev/op_meter.hpp"

namespace olev {

inline constexpr std::size_t kNonceSize = 8;
inline constexpr std::size_t kPlateIdSize = 8;
inline constexpr int kMaxTries = 3;

using PlateId = FixedBytes<kPlateIdSize>;

PlateId plate_id_from_u32(std::uint32_t id);

enum class Behavior { kCooperate, kDeviate };

// OBU -> CP: c1, c2, c3, H3. Wire: c1(104) || c2(64) || c3(64) || h3(64).
struct DmaAuthRequest {
  Bytes c1;
  Digest c2;
  Digest c3;
  Digest h3;

  Bytes encode() const;
  static DmaAuthRequest decode(ByteView wire);
  friend bool operator==(const DmaAuthRequest&, const DmaAuthRequest&) = default;
};

inline constexpr std::size_t kDmaAuthRequestSize = kPseudonymSize + 3 * kDigestSize;

// CP -> OBU: c4, c5, c6, c7. Wire: c4(8) || c5(8) || c6(64) || c7(64).
struct DmaAuthReply {
  FixedBytes<kNonceSize> c4{};
  FixedBytes<kNonceSize> c5{};
  Digest c6;
  Digest c7;

  Bytes encode() const;
  static DmaAuthReply decode(ByteView wire);
  friend bool operator==(const DmaAuthReply&, const DmaAuthReply&) = default;
};

inline constexpr std::size_t kDmaAuthReplySize = 2 * kNonceSize + 2 * kDigestSize;

// State the plate keeps for an accepted request until it replies.
struct DmaAccepted {
  Pseudonym pseudonym;
  Digest x_obu;
  Digest h1;
  Digest h_ps;  // h(PS), reused for h^2(PS)
};

struct DmaSession {
  Pseudonym pseudonym;
  Digest x_obu;
  SymmetricKey session_key;
};

// CP -> OBU: Ack || timestamp || PS || h_{K_V}(alpha).
struct DmaChargeAck {
  Bytes frame;
  SimTime timestamp{0};
  Digest mac;
};

struct PlateConfig {
  std::uint32_t id = 0;
  std::int64_t unit_cost = 1;
  Behavior behavior = Behavior::kCooperate;
  SimTime charge_time{0};
  SimTime freshness_window{0};
  GroupElement dmv_public;
};

class ChargingPlate {
 public:
  explicit ChargingPlate(PlateConfig config);

  std::uint32_t id() const { return config_.id; }
  const PlateId& wire_id() const { return wire_id_; }
  Behavior behavior() const { return config_.behavior; }
  void set_behavior(Behavior b) { config_.behavior = b; }
  const PlateConfig& config() const { return config_; }

  // Wired channel from the CSPA.
  void install_msk(const Digest& msk) { msk_ = msk; }
  void update_roster(std::set<Digest> roster) { roster_ = std::move(roster); }
  void set_link_up(bool up) { link_up_ = up; }

  // New vehicle at the plate: clears the try counter and session state.
  void begin_session();
  int attempts() const { return attempts_; }

  // H1 = H3 ^ MSK, H2 = h(H1), PS = c1 ^ h(H2), X_OBU = c2 ^ h(PS); accept iff
  // X_OBU is on the roster, c3 == h(h(PS) || c2 || H3) and PS carries a valid
  // DMV signature. Counts toward the try limit.
  AuthResult<DmaAccepted> verify_dma_request(const DmaAuthRequest& req);

  // c4..c7 and SK = h(PS || r_c). c7 and SK are charged to the session meter.
  std::pair<DmaAuthReply, SymmetricKey> build_dma_reply(
      const DmaAccepted& accepted, const FixedBytes<kNonceSize>& r_c);

  // Decrypts {timestamp || req || PS || mac}_SK, checks freshness and the
  // presented PS, keeps the MAC as an audit token and returns the ack.
  AuthResult<DmaChargeAck> handle_charging_request_dma(
      const DmaSession& session, ByteView encrypted, SimTime now);

  // Forwards timestamp, h^{k-1}(PS), X_OBU to the CSPA; returns the sealed
  // session key for the OBU.
  AuthResult<ElGamalCiphertext> relay_pha(Cspa& cspa, const Digest& member,
                                          const Digest& x_obu, SimTime now,
                                          DeterministicRng& rng);
  AuthResult<PhaChargeReply> relay_pha_charging_request(
      Cspa& cspa, const Digest& x_obu, ByteView encrypted, SimTime now);

  // Delivers one energy quantum and emits the bill when enough time remains
  // on the plate. A deviating plate bills twice the unit cost.
  std::optional<BillingEntry> transfer_and_bill(
      const Digest& x_obu, const std::optional<Pseudonym>& pseudonym,
      SimTime time_available, SimTime now);

  const OpMeter& auth_meter() const { return auth_meter_; }
  const OpMeter& session_meter() const { return session_meter_; }
  void reset_meters() {
    auth_meter_.reset();
    session_meter_.reset();
  }

  std::uint64_t energy_delivered() const { return energy_quanta_; }
  const std::vector<Digest>& audit_tokens() const { return audit_tokens_; }

 private:
  PlateConfig config_;
  PlateId wire_id_;
  Digest msk_;
  std::set<Digest> roster_;
  bool link_up_ = true;
  int attempts_ = 0;
  std::optional<SimTime> last_request_ts_;
  OpMeter auth_meter_;
  OpMeter session_meter_;
  std::uint64_t energy_quanta_ = 0;
  std::vector<Digest> audit_tokens_;
};

}  // namespace olev

#endif  // OLEV_PLATE_HPP_
