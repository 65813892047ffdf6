#include <set>

#include "doctest.h"
#include "ugw/protocol.hpp"
#include "ugw/wire.hpp"

using namespace ugw;

namespace {

constexpr uint32_t kT0 = 1'700'000'000;

FreshnessPolicy at(uint32_t t, uint32_t window = 5) {
  return FreshnessPolicy{.delta_t = window, .now = [t] { return t; }};
}

// A fully provisioned user + gateway pair, pinned to one seed.
struct Fixture {
  Identity id;
  Password pw;
  UserSetupSecrets user;
  GatewaySecrets gw;
  Registry registry;
  SmartCard card;

  Fixture(uint64_t seed, const CurveParams& cp, const std::string& name,
          const std::string& password)
      : id(Identity::from_name(name)), pw{password} {
    Rng rng(seed);
    UserSetupBegin begin = setup_user_begin(cp, rng);
    auto [gw_secrets, s_i] = setup_gateway_respond(begin.d_u, cp, rng);
    gw = gw_secrets;
    user = setup_user_finish(begin, s_i, cp);

    RegistrationRequest req = register_user_request(id, pw, user, cp);
    IssuedCard issued =
        register_gateway_issue_card(req, gw, registry, cp, kT0 - 3600);
    card = register_user_finalize(issued, pw, user, cp);
  }
};

}  // namespace

TEST_CASE("an honest run agrees on the session key, both profiles") {
  for (const CurveParams* cpp : {&paper160(), &tiny97()}) {
    const CurveParams& cp = *cpp;
    Fixture f(71, cp, "alice", "correct horse battery");
    Rng gw_rng(72);

    auto [req, pending] =
        login_build_request(f.id, f.pw, f.card, f.user, at(kT0), cp);
    CHECK(req.t_ki == kT0);
    CHECK(req.mid == f.card.mid);

    auto [resp, gw_key] =
        gateway_process_login(req, f.gw, f.registry, at(kT0), cp, gw_rng);
    SessionKey user_key =
        user_confirm_session(resp, pending, f.user, at(kT0), cp);

    CHECK(user_key.s_k == gw_key.s_k);
    CHECK(user_key.established_at == resp.t_k_new);
    CHECK(gw_key.peer.uid == f.id.uid);
    CHECK(user_key.peer.uid == f.id.uid);
  }
}

TEST_CASE("the channel key is the same on both sides of setup") {
  const CurveParams& cp = paper160();
  Fixture f(73, cp, "bob", "pw");
  // k_u = kdf(ur_i * S_i), k_gw = kdf(gwr_j * D_u): same point, same key.
  CHECK(f.user.k_u == f.gw.k_gw);
}

TEST_CASE("wrong passwords never get past the local gate") {
  const CurveParams& cp = tiny97();  // the gate is hash-width, not curve-width
  Fixture f(74, cp, "carol", "the real password");

  for (int i = 0; i < 50; ++i) {
    Password wrong{"guess-" + std::to_string(i)};
    CHECK_THROWS_AS(
        login_build_request(f.id, wrong, f.card, f.user, at(kT0), cp),
        ProtocolError);
    try {
      login_build_request(f.id, wrong, f.card, f.user, at(kT0), cp);
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kLocalAuthFailure);
    }
  }
  // Including near-misses of the true password.
  for (std::string wrong : {"the real password ", "The real password",
                            "the real passwor", ""}) {
    CHECK_THROWS_AS(
        login_build_request(f.id, Password{wrong}, f.card, f.user, at(kT0), cp),
        ProtocolError);
  }
}

TEST_CASE("someone else's card fails the gate even with the right password") {
  const CurveParams& cp = tiny97();
  Fixture alice(75, cp, "alice", "shared password");
  Fixture mallory(76, cp, "mallory", "shared password");
  // Mallory knows the password but presents Alice's identity with her own
  // card-and-device pair mismatched: x_i binds uid and h_i together.
  CHECK_THROWS_AS(login_build_request(alice.id, alice.pw, mallory.card,
                                      mallory.user, at(kT0), cp),
                  ProtocolError);
}

TEST_CASE("gateway rejections carry the right causes") {
  const CurveParams& cp = paper160();
  Fixture f(77, cp, "dave", "pw");
  Rng gw_rng(78);

  auto [req, pending] =
      login_build_request(f.id, f.pw, f.card, f.user, at(kT0), cp);

  SUBCASE("stale timestamp") {
    try {
      gateway_process_login(req, f.gw, f.registry, at(kT0 + 6), cp, gw_rng);
      FAIL("accepted a stale request");
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kFreshnessViolation);
    }
  }

  SUBCASE("future timestamp is equally stale") {
    auto [req2, pending2] =
        login_build_request(f.id, f.pw, f.card, f.user, at(kT0 + 100), cp);
    try {
      gateway_process_login(req2, f.gw, f.registry, at(kT0), cp, gw_rng);
      FAIL("accepted a request from the future");
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kFreshnessViolation);
    }
  }

  SUBCASE("unregistered identity") {
    Registry empty;
    try {
      gateway_process_login(req, f.gw, empty, at(kT0), cp, gw_rng);
      FAIL("accepted an unregistered uid");
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kUnknownIdentity);
    }
  }

  SUBCASE("garbled login blob") {
    LoginRequest bent = req;
    bent.z_login[0] ^= 0x01;  // decrypts to an off-curve point
    try {
      gateway_process_login(bent, f.gw, f.registry, at(kT0), cp, gw_rng);
      FAIL("accepted a garbled z");
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kMalformedRequest);
    }
  }

  SUBCASE("tampered pid") {
    LoginRequest bent = req;
    bent.pid.v[0] ^= 0x01;
    try {
      gateway_process_login(bent, f.gw, f.registry, at(kT0), cp, gw_rng);
      FAIL("accepted a tampered pid");
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kAuthenticationFailure);
    }
  }
}

TEST_CASE("the user rejects a tampered or stale response") {
  const CurveParams& cp = paper160();
  Fixture f(79, cp, "erin", "pw");
  Rng gw_rng(80);

  auto [req, pending] =
      login_build_request(f.id, f.pw, f.card, f.user, at(kT0), cp);
  auto [resp, gw_key] =
      gateway_process_login(req, f.gw, f.registry, at(kT0), cp, gw_rng);

  SUBCASE("bit-flipped confirmation digest") {
    AuthResponse bent = resp;
    bent.sq_i.v[10] ^= 0x80;
    try {
      user_confirm_session(bent, pending, f.user, at(kT0), cp);
      FAIL("accepted a tampered sq");
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kGatewayAuthFailure);
    }
  }

  SUBCASE("bit-flipped nonce") {
    AuthResponse bent = resp;
    bent.ns[5] ^= 0x01;
    CHECK_THROWS_AS(user_confirm_session(bent, pending, f.user, at(kT0), cp),
                    ProtocolError);
  }

  SUBCASE("stale response stamp") {
    try {
      user_confirm_session(resp, pending, f.user, at(kT0 + 6), cp);
      FAIL("accepted a stale response");
    } catch (const ProtocolError& e) {
      CHECK(e.kind() == ErrKind::kFreshnessViolation);
    }
  }
}

TEST_CASE("every login derives a fresh session key") {
  const CurveParams& cp = paper160();
  Fixture f(81, cp, "frank", "pw");

  std::set<std::string> keys;
  for (uint32_t i = 0; i < 10; ++i) {
    Rng gw_rng(900 + i);
    auto [req, pending] =
        login_build_request(f.id, f.pw, f.card, f.user, at(kT0 + i), cp);
    auto [resp, gw_key] =
        gateway_process_login(req, f.gw, f.registry, at(kT0 + i), cp, gw_rng);
    SessionKey user_key =
        user_confirm_session(resp, pending, f.user, at(kT0 + i), cp);
    CHECK(user_key.s_k == gw_key.s_k);
    CHECK(keys.insert(user_key.s_k.hex()).second);
  }
}

TEST_CASE("the pseudonym and masked values reconstruct consistently") {
  const CurveParams& cp = paper160();
  Fixture f(82, cp, "grace", "pw");

  // T as the gateway derives it equals T as the card stores it (masked).
  Digest160 t_gw = derive_t(f.gw.s_i, f.gw.k_gw, cp);
  Digest160 h_i = derive_h_i(f.user.d_u, f.pw, f.id.uid, cp);
  CHECK((f.card.o_i ^ h_i) == t_gw);

  // pid binds T, uid, L_i and the stamp; any component shift changes it.
  Digest160 l_i = derive_l_i(f.user.d_u, f.id.uid, cp);
  Digest160 pid = derive_pid(t_gw, f.id.uid, l_i, kT0);
  CHECK(pid != derive_pid(t_gw, f.id.uid, l_i, kT0 + 1));
  Digest160 other_uid = hash160(to_bytes("not grace"));
  CHECK(pid != derive_pid(t_gw, other_uid, l_i, kT0));
}

TEST_CASE("registration refuses duplicates and empty passwords") {
  const CurveParams& cp = tiny97();
  Fixture f(83, cp, "heidi", "pw");

  // Same uid again: the registry already holds it.
  RegistrationRequest req = register_user_request(f.id, f.pw, f.user, cp);
  CHECK_THROWS_AS(
      register_gateway_issue_card(req, f.gw, f.registry, cp, kT0),
      ProtocolError);
  try {
    register_gateway_issue_card(req, f.gw, f.registry, cp, kT0);
  } catch (const ProtocolError& e) {
    CHECK(e.kind() == ErrKind::kIdentityNotAvailable);
  }

  CHECK_THROWS_AS(register_user_request(f.id, Password{""}, f.user, cp),
                  ProtocolError);
}

TEST_CASE("password update rewrites the card but not the pseudonym") {
  const CurveParams& cp = paper160();
  Fixture f(84, cp, "ivan", "old password");
  Password pw_new{"new password"};

  SmartCard updated =
      password_update(f.card, f.id, f.pw, pw_new, f.user, cp);
  CHECK(updated.mid == f.card.mid);
  CHECK(updated.o_i != f.card.o_i);
  CHECK(updated.x_i != f.card.x_i);

  // New password logs in against the unchanged gateway.
  Rng gw_rng(85);
  auto [req, pending] =
      login_build_request(f.id, pw_new, updated, f.user, at(kT0), cp);
  auto [resp, gw_key] =
      gateway_process_login(req, f.gw, f.registry, at(kT0), cp, gw_rng);
  SessionKey user_key =
      user_confirm_session(resp, pending, f.user, at(kT0), cp);
  CHECK(user_key.s_k == gw_key.s_k);

  // Old password is dead; wrong old password can't update at all.
  CHECK_THROWS_AS(
      login_build_request(f.id, f.pw, updated, f.user, at(kT0 + 1), cp),
      ProtocolError);
  CHECK_THROWS_AS(password_update(updated, f.id, Password{"wrong"},
                                  Password{"x"}, f.user, cp),
                  ProtocolError);
}

TEST_CASE("identity derivation is stable and name-sensitive") {
  Identity a1 = Identity::from_name("alice");
  Identity a2 = Identity::from_name("alice");
  Identity b = Identity::from_name("alicf");
  CHECK(a1.uid == a2.uid);
  CHECK(a1.uid != b.uid);
  CHECK(a1.raw == "alice");
}

TEST_CASE("nonce reduction rejects the zero residue") {
  const CurveParams& cp = tiny97();
  Bytes zero(16, 0x00);
  CHECK(!nonce_to_scalar(zero, cp).has_value());

  // 50 reduces to 0 mod n on the tiny profile.
  Bytes fifty(16, 0x00);
  fifty[15] = 50;
  CHECK(!nonce_to_scalar(fifty, cp).has_value());

  Bytes one(16, 0x00);
  one[15] = 1;
  auto s = nonce_to_scalar(one, cp);
  REQUIRE(s.has_value());
  CHECK(s->v == 1);

  // On the wide profile a random nonce essentially never reduces to zero.
  Rng rng(86);
  for (int i = 0; i < 50; ++i) {
    auto sw = nonce_to_scalar(rng.bytes(16), paper160());
    REQUIRE(sw.has_value());
    CHECK(sw->v >= 1);
    CHECK(sw->v < paper160().n);
  }
}

TEST_CASE("freshness window arithmetic is symmetric and inclusive") {
  FreshnessPolicy p = at(1000, 5);
  CHECK(p.fresh(1000));
  CHECK(p.fresh(995));
  CHECK(p.fresh(1005));
  CHECK(!p.fresh(994));
  CHECK(!p.fresh(1006));
}
