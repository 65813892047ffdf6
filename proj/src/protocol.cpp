#include "ugw/protocol.hpp"

#include <cstring>

namespace ugw {

namespace {

// Seal d_u under the password-derived key. The card never holds d_u in the
// clear; recovering it costs one scalar-mul plus the password.
std::array<uint8_t, CurveParams::kPointBytes> seal_d_u(
    const CurvePoint& d_u, const Password& pw, const CurveParams& cp) {
  Scalar tk = hash_to_scalar(to_bytes(pw.value), cp);
  SymmetricKey unlock = kbkdf(scalar_mul(tk, cp.g, cp), kCtxCard, cp);
  Bytes ct = sym_encrypt(unlock, kCtxCard, encode_point(d_u, cp));
  std::array<uint8_t, CurveParams::kPointBytes> out{};
  std::memcpy(out.data(), ct.data(), out.size());
  return out;
}

// Open z_card with a candidate password. Off-curve garbage (any wrong
// password, overwhelmingly) comes back as nullopt.
std::optional<CurvePoint> open_d_u(
    const std::array<uint8_t, CurveParams::kPointBytes>& z_card,
    const Password& pw, const CurveParams& cp) {
  Scalar tk = hash_to_scalar(to_bytes(pw.value), cp);
  SymmetricKey unlock = kbkdf(scalar_mul(tk, cp.g, cp), kCtxCard, cp);
  Bytes pt = sym_decrypt(unlock, kCtxCard, z_card);
  return decode_point(pt, cp);
}

}  // namespace

Identity Identity::from_name(std::string_view raw) {
  Identity id;
  id.raw = std::string(raw);
  id.uid = hash160_cat({to_bytes("UID"), to_bytes(raw)});
  return id;
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

Digest160 derive_h_i(const CurvePoint& d_u, const Password& pw,
                     const Digest160& uid, const CurveParams& cp) {
  return hash160_cat({encode_point(d_u, cp), to_bytes(pw.value), uid.bytes()});
}

Digest160 derive_t(const CurvePoint& s_i, const SymmetricKey& k_gw,
                   const CurveParams& cp) {
  return hash160_cat({encode_point(s_i, cp), k_gw.bytes()});
}

Digest160 derive_l_i(const CurvePoint& d_u, const Digest160& uid,
                     const CurveParams& cp) {
  return hash160_cat({encode_point(d_u, cp), uid.bytes()});
}

Digest160 derive_pid(const Digest160& t, const Digest160& uid,
                     const Digest160& l_i, uint32_t t_ki) {
  Bytes stamp;
  put_be32(stamp, t_ki);
  return t ^ hash160_cat({uid.bytes(), l_i.bytes(), stamp});
}

Digest160 derive_session_key(const Digest160& uid, const Digest160& t,
                             const CurvePoint& shared, const CurveParams& cp) {
  return hash160_cat({uid.bytes(), t.bytes(), encode_point(shared, cp)});
}

Digest160 derive_sq(const Digest160& s_k, std::span<const uint8_t> n_gw,
                    const Digest160& t, uint32_t t_k_new) {
  Bytes stamp;
  put_be32(stamp, t_k_new);
  return hash160_cat({s_k.bytes(), n_gw, t.bytes(), stamp});
}

std::optional<Scalar> nonce_to_scalar(std::span<const uint8_t> n_gw,
                                      const CurveParams& cp) {
  BigInt v = 0;
  for (uint8_t b : n_gw) v = (v << 8) | b;
  v %= cp.n;
  if (v == 0) return std::nullopt;
  return Scalar{v};
}

// ---------------------------------------------------------------------------
// Setup
// ---------------------------------------------------------------------------

UserSetupBegin setup_user_begin(const CurveParams& cp, Rng& rng) {
  Scalar ur_i = rng.scalar(cp);
  return {ur_i, scalar_mul(ur_i, cp.g, cp)};
}

std::pair<GatewaySecrets, CurvePoint> setup_gateway_respond(
    const CurvePoint& d_u, const CurveParams& cp, Rng& rng) {
  if (d_u.identity || !on_curve(d_u, cp))
    throw ProtocolError(ErrKind::kMalformedRequest, "setup: bad d_u");
  GatewaySecrets gw;
  // A degenerate DH point (possible on the tiny profile when small-order
  // points meet an unlucky scalar) would leave no channel key; resample.
  for (;;) {
    gw.gwr_j = rng.scalar(cp);
    CurvePoint shared = scalar_mul(gw.gwr_j, d_u, cp);
    if (shared.identity) continue;
    gw.s_i = scalar_mul(gw.gwr_j, cp.g, cp);
    gw.k_gw = kbkdf(shared, kKdfChannel, cp);
    return {gw, gw.s_i};
  }
}

UserSetupSecrets setup_user_finish(const UserSetupBegin& begin,
                                   const CurvePoint& s_i,
                                   const CurveParams& cp) {
  if (s_i.identity || !on_curve(s_i, cp))
    throw ProtocolError(ErrKind::kMalformedRequest, "setup: bad s_i");
  CurvePoint shared = scalar_mul(begin.ur_i, s_i, cp);
  if (shared.identity)
    throw ProtocolError(ErrKind::kMalformedRequest, "setup: degenerate key");
  return {begin.ur_i, begin.d_u, s_i, kbkdf(shared, kKdfChannel, cp)};
}

// ---------------------------------------------------------------------------
// Registration
// ---------------------------------------------------------------------------

RegistrationRequest register_user_request(const Identity& id,
                                          const Password& pw,
                                          const UserSetupSecrets& secrets,
                                          const CurveParams& cp) {
  if (pw.value.empty())
    throw ProtocolError(ErrKind::kMalformedRequest,
                        "registration: empty password");
  return {id.uid, derive_h_i(secrets.d_u, pw, id.uid, cp)};
}

IssuedCard register_gateway_issue_card(const RegistrationRequest& req,
                                       const GatewaySecrets& gw,
                                       Registry& registry,
                                       const CurveParams& cp,
                                       uint64_t now_epoch) {
  if (!registry.try_insert({req.uid, now_epoch, 1}))
    throw ProtocolError(ErrKind::kIdentityNotAvailable,
                        "registration: identity not available");
  Digest160 t = derive_t(gw.s_i, gw.k_gw, cp);
  IssuedCard card;
  card.o_i = t ^ req.h_i;
  card.mid = Digest160::from(sym_encrypt(gw.k_gw, kCtxMid, req.uid.bytes()));
  card.x_i = hash160((req.uid ^ req.h_i).bytes());
  return card;
}

SmartCard register_user_finalize(const IssuedCard& issued, const Password& pw,
                                 const UserSetupSecrets& secrets,
                                 const CurveParams& cp) {
  SmartCard card;
  card.o_i = issued.o_i;
  card.mid = issued.mid;
  card.x_i = issued.x_i;
  card.z_card = seal_d_u(secrets.d_u, pw, cp);
  card.profile_id = cp.id;
  return card;
}

// ---------------------------------------------------------------------------
// Login + key agreement
// ---------------------------------------------------------------------------

std::pair<LoginRequest, LoginPending> login_build_request(
    const Identity& id, const Password& pw, const SmartCard& card,
    const UserSetupSecrets& secrets, const FreshnessPolicy& policy,
    const CurveParams& cp) {
  // Two-factor gate: recover d_u from the card with the password, then
  // check the recovered values against x_i. A wrong password either fails
  // the curve decode or the x_i comparison; a wrong card fails both.
  std::optional<CurvePoint> d_u = open_d_u(card.z_card, pw, cp);
  if (!d_u)
    throw ProtocolError(ErrKind::kLocalAuthFailure,
                        "login: password/card mismatch");
  Digest160 h_i = derive_h_i(*d_u, pw, id.uid, cp);
  if (hash160((id.uid ^ h_i).bytes()) != card.x_i)
    throw ProtocolError(ErrKind::kLocalAuthFailure,
                        "login: password/card mismatch");

  LoginPending pending;
  pending.uid = id.uid;
  pending.t = card.o_i ^ h_i;
  pending.l_i = derive_l_i(*d_u, id.uid, cp);
  pending.d_u = *d_u;
  pending.t_ki = policy.now();

  LoginRequest req;
  req.pid = derive_pid(pending.t, id.uid, pending.l_i, pending.t_ki);
  req.t_ki = pending.t_ki;
  req.mid = card.mid;
  Bytes z = sym_encrypt(secrets.k_u, kCtxLogin, encode_point(*d_u, cp));
  std::memcpy(req.z_login.data(), z.data(), req.z_login.size());
  return {req, pending};
}

std::pair<AuthResponse, SessionKey> gateway_process_login(
    const LoginRequest& req, const GatewaySecrets& gw,
    const Registry& registry, const FreshnessPolicy& policy,
    const CurveParams& cp, Rng& rng) {
  // 1) timestamp window
  if (!policy.fresh(req.t_ki))
    throw ProtocolError(ErrKind::kFreshnessViolation, "login: stale t_ki");

  // 2) pseudonym -> uid, must be a registered active identity
  Digest160 uid =
      Digest160::from(sym_decrypt(gw.k_gw, kCtxMid, req.mid.bytes()));
  if (!registry.is_active(uid))
    throw ProtocolError(ErrKind::kUnknownIdentity, "login: unknown identity");

  // 3) recover d_u from z_login; tampering lands off curve
  std::optional<CurvePoint> d_u =
      decode_point(sym_decrypt(gw.k_gw, kCtxLogin, req.z_login), cp);
  if (!d_u)
    throw ProtocolError(ErrKind::kMalformedRequest,
                        "login: z does not decode to a curve point");

  // 4) recompute pid and compare
  Digest160 t = derive_t(gw.s_i, gw.k_gw, cp);
  Digest160 n_i = derive_l_i(*d_u, uid, cp);
  Digest160 pid_expected = derive_pid(t, uid, n_i, req.t_ki);
  if (!equal_ct(pid_expected.bytes(), req.pid.bytes()))
    throw ProtocolError(ErrKind::kAuthenticationFailure,
                        "login: pid verification failed");

  // 5) fresh nonce, session key, response
  Bytes n_gw;
  CurvePoint shared;
  for (;;) {
    n_gw = rng.bytes(16);
    auto s = nonce_to_scalar(n_gw, cp);
    if (!s) continue;
    shared = scalar_mul(*s, *d_u, cp);
    if (!shared.identity) break;  // degenerate only on the tiny profile
  }

  SessionKey key;
  key.s_k = derive_session_key(uid, t, shared, cp);
  key.established_at = policy.now();
  key.peer = Identity{"", uid};

  AuthResponse resp;
  resp.t_k_new = key.established_at;
  Bytes ns_ct = sym_encrypt(gw.k_gw, kCtxNonce, n_gw);
  std::memcpy(resp.ns.data(), ns_ct.data(), resp.ns.size());
  resp.sq_i = derive_sq(key.s_k, n_gw, t, resp.t_k_new);
  return {resp, key};
}

SessionKey user_confirm_session(const AuthResponse& resp,
                                const LoginPending& pending,
                                const UserSetupSecrets& secrets,
                                const FreshnessPolicy& policy,
                                const CurveParams& cp) {
  if (!policy.fresh(resp.t_k_new))
    throw ProtocolError(ErrKind::kFreshnessViolation, "confirm: stale t_k");

  Bytes n_gw = sym_decrypt(secrets.k_u, kCtxNonce, resp.ns);
  auto n_scalar = nonce_to_scalar(n_gw, cp);
  if (!n_scalar)
    throw ProtocolError(ErrKind::kGatewayAuthFailure,
                        "confirm: degenerate nonce");
  CurvePoint shared = scalar_mul(*n_scalar, pending.d_u, cp);
  if (shared.identity)
    throw ProtocolError(ErrKind::kGatewayAuthFailure,
                        "confirm: degenerate key point");

  Digest160 s_k = derive_session_key(pending.uid, pending.t, shared, cp);
  Digest160 sq_expected = derive_sq(s_k, n_gw, pending.t, resp.t_k_new);
  if (!equal_ct(sq_expected.bytes(), resp.sq_i.bytes()))
    throw ProtocolError(ErrKind::kGatewayAuthFailure,
                        "confirm: sq verification failed");
  return SessionKey{s_k, resp.t_k_new, Identity{"", pending.uid}};
}

// ---------------------------------------------------------------------------
// Password update
// ---------------------------------------------------------------------------

SmartCard password_update(const SmartCard& card, const Identity& id,
                          const Password& pw_old, const Password& pw_new,
                          const UserSetupSecrets& secrets,
                          const CurveParams& cp) {
  if (pw_new.value.empty())
    throw ProtocolError(ErrKind::kMalformedRequest,
                        "password update: empty new password");
  Digest160 h_old = derive_h_i(secrets.d_u, pw_old, id.uid, cp);
  if (hash160((id.uid ^ h_old).bytes()) != card.x_i)
    throw ProtocolError(ErrKind::kLocalAuthFailure,
                        "password update: old password rejected");

  Digest160 h_new = derive_h_i(secrets.d_u, pw_new, id.uid, cp);
  SmartCard updated;
  // o_i = T xor h_i, so T survives the swap: (o_i xor h_old) xor h_new.
  updated.o_i = card.o_i ^ h_old ^ h_new;
  updated.mid = card.mid;  // gateway-issued pseudonym; never rotates here
  updated.x_i = hash160((id.uid ^ h_new).bytes());
  updated.z_card = seal_d_u(secrets.d_u, pw_new, cp);
  updated.profile_id = card.profile_id;
  return updated;
}

}  // namespace ugw
