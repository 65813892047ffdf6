#pragma once

#include <chrono>
#include <string>

#include "ugw/protocol.hpp"
#include "ugw/transport.hpp"

namespace ugw {

struct AgentConfig {
  std::string gateway_id = "gw0";
  std::string card_path;    // resolved by the CLI (default ~/.ugw/card.bin)
  std::string device_path;  // default ~/.ugw/device.bin
  std::string profile_id = "paper160";
  uint32_t delta_t = 5;
  std::chrono::milliseconds timeout{3000};
  // Test hook: timestamps come from here when set (the gateway's replay
  // cache rejects two logins inside one real second, so tests step a fake
  // clock instead of sleeping). Null means the system clock.
  std::function<uint32_t()> clock;
};

// What a successful login leaves behind, in memory only: the agreed key
// and the pseudonym that addresses the session on the gateway.
struct LoginResult {
  SessionKey session;
  Digest160 mid;
};

// User-side flows over any Transport. Owns no connection state beyond the
// card/device files; the password is taken per call and never stored.
class UserAgent {
 public:
  UserAgent(AgentConfig config, Transport& transport, Rng rng);

  // Setup + registration in one secure round trip; writes the card and
  // device-state files (0600). Throws kIdentityNotAvailable if the name is
  // taken, kMalformedRequest on an empty password.
  void enroll(const std::string& name, const Password& pw);

  // Two-factor login. Throws kLocalAuthFailure before anything is sent if
  // the password/card combination is wrong; kGatewayAuthFailure if the
  // gateway rejects or its response fails verification.
  LoginResult login(const std::string& name, const Password& pw);

  // Round-trips `message` encrypted under the session-derived echo key.
  Bytes echo(const LoginResult& session, std::span<const uint8_t> message);

  // Local card rewrite; the gateway is not involved and mid is unchanged.
  void update_password(const std::string& name, const Password& pw_old,
                       const Password& pw_new);

 private:
  SmartCard load_card() const;
  UserSetupSecrets load_device() const;

  AgentConfig config_;
  const CurveParams& cp_;
  Transport& transport_;
  Rng rng_;
};

// Whole-file helpers used for card/device/registry-shaped state.
// write_file_private writes 0600 and atomically (temp + rename).
Bytes read_file(const std::string& path);  // throws kStateError
void write_file_private(const std::string& path, const Bytes& data);

}  // namespace ugw
