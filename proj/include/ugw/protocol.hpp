#pragma once

#include <array>
#include <ctime>
#include <functional>
#include <string>
#include <string_view>
#include <utility>

#include "ugw/cipher.hpp"
#include "ugw/curve.hpp"
#include "ugw/digest.hpp"
#include "ugw/errors.hpp"
#include "ugw/kdf.hpp"
#include "ugw/registry.hpp"
#include "ugw/rng.hpp"

namespace ugw {

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

// A user identity: the human-readable form plus its 160-bit identifier
// uid = hash("UID" || raw). Only the uid ever appears in protocol values;
// the raw form stays on the user device.
struct Identity {
  std::string raw;
  Digest160 uid;

  bool operator==(const Identity&) const = default;

  static Identity from_name(std::string_view raw);
};

struct Password {
  std::string value;
};

// User-side output of the first setup flight: long-term keypair
// (ur_i, d_u = ur_i * G). s_i / k_u are not known yet.
struct UserSetupBegin {
  Scalar ur_i;
  CurvePoint d_u;
};

// Completed user-device state. ur_i/d_u/s_i live in device confidential
// memory, k_u in device secret memory; none of it is on the card.
struct UserSetupSecrets {
  Scalar ur_i;
  CurvePoint d_u;
  CurvePoint s_i;
  SymmetricKey k_u;
};

// Gateway-side per-user secrets established at setup (fresh gwr_j per
// user). The service keeps one of these per registered user, keyed by the
// mid it issued; d_u itself is never retained.
struct GatewaySecrets {
  Scalar gwr_j;
  CurvePoint s_i;
  SymmetricKey k_gw;
};

struct RegistrationRequest {
  Digest160 uid;
  Digest160 h_i;  // hash(d_u || password || uid)
};

// Fields the gateway returns at registration; the user completes them into
// a SmartCard locally (z_card never leaves the user device).
struct IssuedCard {
  Digest160 o_i;  // T xor h_i
  Digest160 mid;  // Enc_kgw("MID", uid) — stable pseudonym
  Digest160 x_i;  // hash(uid xor h_i) — local two-factor gate
};

// Card contents. o_i/mid/x_i sit in card confidential memory; z_card is
// the secret-memory blob (d_u sealed under the password-derived key).
struct SmartCard {
  Digest160 o_i;
  Digest160 mid;
  Digest160 x_i;
  std::array<uint8_t, CurveParams::kPointBytes> z_card{};
  std::string profile_id;

  bool operator==(const SmartCard&) const = default;
};

// Public-channel login request: pid(20) || t_ki(4) || mid(20) || z(40),
// 672 bits on the wire.
struct LoginRequest {
  Digest160 pid;
  uint32_t t_ki = 0;
  Digest160 mid;
  std::array<uint8_t, CurveParams::kPointBytes> z_login{};

  bool operator==(const LoginRequest&) const = default;
};

// Public-channel response: sq(20) || ns(16) || t_k_new(4), 320 bits.
struct AuthResponse {
  Digest160 sq_i;
  std::array<uint8_t, 16> ns{};
  uint32_t t_k_new = 0;

  bool operator==(const AuthResponse&) const = default;
};

// Agreed session key plus bookkeeping. `peer` is the user identity the
// session belongs to (uid-only on the gateway side, which never learns the
// raw name); both sides of an honest run hold bit-identical s_k.
struct SessionKey {
  Digest160 s_k;
  uint32_t established_at = 0;
  Identity peer;

  bool operator==(const SessionKey&) const = default;
};

// User-side state held between sending a LoginRequest and verifying the
// AuthResponse.
struct LoginPending {
  Digest160 uid;
  Digest160 t;    // card-recovered T = o_i xor h_i
  Digest160 l_i;  // hash(d_u || uid)
  CurvePoint d_u;
  uint32_t t_ki = 0;
};

// Freshness window. `now` is injected so tests and the attack harness can
// drive time explicitly; the default reads the system clock.
struct FreshnessPolicy {
  uint32_t delta_t = 5;  // seconds
  std::function<uint32_t()> now = [] {
    return static_cast<uint32_t>(::time(nullptr));
  };

  bool fresh(uint32_t stamp) const {
    uint32_t t = now();
    uint32_t age = t >= stamp ? t - stamp : stamp - t;
    return age <= delta_t;
  }
};

// ---------------------------------------------------------------------------
// Protocol operations
// ---------------------------------------------------------------------------

// -- setup (secure channel / out of band) --

UserSetupBegin setup_user_begin(const CurveParams& cp, Rng& rng);

// Gateway receives d_u, derives fresh per-user secrets, returns them plus
// s_i for the user. d_u is used transiently and not retained.
std::pair<GatewaySecrets, CurvePoint> setup_gateway_respond(
    const CurvePoint& d_u, const CurveParams& cp, Rng& rng);

UserSetupSecrets setup_user_finish(const UserSetupBegin& begin,
                                   const CurvePoint& s_i,
                                   const CurveParams& cp);

// -- registration (secure channel) --

// Throws on an empty password; length policy beyond that is the CLI's job.
RegistrationRequest register_user_request(const Identity& id,
                                          const Password& pw,
                                          const UserSetupSecrets& secrets,
                                          const CurveParams& cp);

// Inserts the uid into the registry (IdentityNotAvailable if taken) and
// derives the card fields. `now_epoch` stamps the registration record.
IssuedCard register_gateway_issue_card(const RegistrationRequest& req,
                                       const GatewaySecrets& gw,
                                       Registry& registry,
                                       const CurveParams& cp,
                                       uint64_t now_epoch);

// Seals d_u under the password key and assembles the full card.
SmartCard register_user_finalize(const IssuedCard& issued, const Password& pw,
                                 const UserSetupSecrets& secrets,
                                 const CurveParams& cp);

// -- login + key agreement (public channel) --

// Runs the local two-factor gate (password + card) and builds the request.
// Throws LocalAuthFailure if the password/card combination is wrong; no
// message is emitted in that case.
std::pair<LoginRequest, LoginPending> login_build_request(
    const Identity& id, const Password& pw, const SmartCard& card,
    const UserSetupSecrets& secrets, const FreshnessPolicy& policy,
    const CurveParams& cp);

// Full gateway-side verification; returns the wire response and the
// established session key. No replay cache here — this function is pure
// given (request, secrets, registry, clock); the service layer adds the
// duplicate-timestamp cache. Rejection kinds: stale t_ki ->
// FreshnessViolation, unregistered uid -> UnknownIdentity, z_login not
// decoding to a curve point -> MalformedRequest, pid mismatch ->
// AuthenticationFailure. The wire layer reports all four identically.
std::pair<AuthResponse, SessionKey> gateway_process_login(
    const LoginRequest& req, const GatewaySecrets& gw,
    const Registry& registry, const FreshnessPolicy& policy,
    const CurveParams& cp, Rng& rng);

// User-side verification of the gateway response; returns the agreed key.
SessionKey user_confirm_session(const AuthResponse& resp,
                                const LoginPending& pending,
                                const UserSetupSecrets& secrets,
                                const FreshnessPolicy& policy,
                                const CurveParams& cp);

// -- password update (local, no gateway involvement) --

// Verifies the old password through the card gate, then rewrites the
// password-derived fields (h_i / o_i / x_i / z_card). mid is untouched:
// the gateway never learns a password changed.
SmartCard password_update(const SmartCard& card, const Identity& id,
                          const Password& pw_old, const Password& pw_new,
                          const UserSetupSecrets& secrets,
                          const CurveParams& cp);

// ---------------------------------------------------------------------------
// Shared derivations (exposed for tests and the attack harness)
// ---------------------------------------------------------------------------

// Context labels for the symmetric cipher and the point-to-key KDF.
inline constexpr std::string_view kCtxMid = "MID";
inline constexpr std::string_view kCtxCard = "ZCARD";
inline constexpr std::string_view kCtxLogin = "ZLOGIN";
inline constexpr std::string_view kCtxNonce = "NS";
inline constexpr std::string_view kKdfChannel = "UGWK";

Digest160 derive_h_i(const CurvePoint& d_u, const Password& pw,
                     const Digest160& uid, const CurveParams& cp);
Digest160 derive_t(const CurvePoint& s_i, const SymmetricKey& k_gw,
                   const CurveParams& cp);
Digest160 derive_l_i(const CurvePoint& d_u, const Digest160& uid,
                     const CurveParams& cp);
Digest160 derive_pid(const Digest160& t, const Digest160& uid,
                     const Digest160& l_i, uint32_t t_ki);
Digest160 derive_session_key(const Digest160& uid, const Digest160& t,
                             const CurvePoint& shared, const CurveParams& cp);
Digest160 derive_sq(const Digest160& s_k, std::span<const uint8_t> n_gw,
                    const Digest160& t, uint32_t t_k_new);

// 16-byte nonce -> scalar in [1, n-1]; nullopt if the reduction lands on 0
// (generation resamples; verification treats it as a failed check).
std::optional<Scalar> nonce_to_scalar(std::span<const uint8_t> n_gw,
                                      const CurveParams& cp);

}  // namespace ugw
