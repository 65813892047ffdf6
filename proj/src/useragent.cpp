#include "ugw/useragent.hpp"

#include <sys/stat.h>

#include <cstdio>
#include <fstream>

#include "ugw/errors.hpp"
#include "ugw/gateway.hpp"
#include "ugw/wire.hpp"

namespace ugw {

Bytes read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ProtocolError(ErrKind::kStateError, "cannot open " + path);
  return Bytes((std::istreambuf_iterator<char>(f)),
               std::istreambuf_iterator<char>());
}

void write_file_private(const std::string& path, const Bytes& data) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw ProtocolError(ErrKind::kStateError,
                          "cannot open " + tmp + " for writing");
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
    f.flush();
    if (!f)
      throw ProtocolError(ErrKind::kStateError, "write failed: " + tmp);
  }
  ::chmod(tmp.c_str(), 0600);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ProtocolError(ErrKind::kStateError,
                        "rename into place failed: " + path);
  }
}

UserAgent::UserAgent(AgentConfig config, Transport& transport, Rng rng)
    : config_(std::move(config)),
      cp_(profile(config_.profile_id)),
      transport_(transport),
      rng_(rng) {}

SmartCard UserAgent::load_card() const {
  auto card = decode_card_file(read_file(config_.card_path));
  if (!card)
    throw ProtocolError(ErrKind::kStateError,
                        "card file damaged or wrong format: " +
                            config_.card_path);
  if (card->profile_id != cp_.id)
    throw ProtocolError(ErrKind::kStateError,
                        "card was issued under profile " + card->profile_id +
                            ", agent is running " + cp_.id);
  return *card;
}

UserSetupSecrets UserAgent::load_device() const {
  auto secrets = decode_device_state(read_file(config_.device_path), cp_);
  if (!secrets)
    throw ProtocolError(ErrKind::kStateError,
                        "device state damaged or wrong profile: " +
                            config_.device_path);
  return *secrets;
}

void UserAgent::enroll(const std::string& name, const Password& pw) {
  Identity id = Identity::from_name(name);
  UserSetupBegin begin = setup_user_begin(cp_, rng_);

  // The request hash only involves d_u; s_i/k_u arrive with the reply.
  UserSetupSecrets partial;
  partial.ur_i = begin.ur_i;
  partial.d_u = begin.d_u;

  RegisterFrame frame;
  Bytes d_u_raw = encode_point(begin.d_u, cp_);
  std::copy(d_u_raw.begin(), d_u_raw.end(), frame.d_u.begin());
  frame.request = register_user_request(id, pw, partial, cp_);

  Bytes reply = request_reply(transport_, topic_prefix_reg(config_.gateway_id),
                              encode_register_frame(frame), rng_,
                              config_.timeout);
  if (reply.size() == 2 && reply[0] == kFrameFailure) {
    if (reply[1] == kRegFailIdentityTaken)
      throw ProtocolError(ErrKind::kIdentityNotAvailable,
                          "identity not available: " + name);
    throw ProtocolError(ErrKind::kMalformedRequest,
                        "gateway rejected the registration request");
  }
  auto rr = decode_register_reply(reply);
  if (!rr)
    throw ProtocolError(ErrKind::kTransportFailure,
                        "unintelligible registration reply");
  auto s_i = decode_point(rr->s_i, cp_);
  if (!s_i)
    throw ProtocolError(ErrKind::kTransportFailure,
                        "registration reply carries an invalid point");

  UserSetupSecrets secrets = setup_user_finish(begin, *s_i, cp_);
  SmartCard card = register_user_finalize(rr->issued, pw, secrets, cp_);

  write_file_private(config_.card_path, encode_card_file(card));
  write_file_private(config_.device_path, encode_device_state(secrets, cp_));
}

LoginResult UserAgent::login(const std::string& name, const Password& pw) {
  Identity id = Identity::from_name(name);
  SmartCard card = load_card();
  UserSetupSecrets secrets = load_device();
  FreshnessPolicy policy{.delta_t = config_.delta_t};
  if (config_.clock) policy.now = config_.clock;

  auto [req, pending] =
      login_build_request(id, pw, card, secrets, policy, cp_);

  Bytes reply = request_reply(transport_,
                              topic_prefix_auth(config_.gateway_id),
                              encode_login_request(req), rng_,
                              config_.timeout);
  if (reply.size() == 1 && reply[0] == kFrameFailure)
    throw ProtocolError(ErrKind::kGatewayAuthFailure,
                        "gateway rejected the login");
  auto resp = decode_auth_response(reply);
  if (!resp)
    throw ProtocolError(ErrKind::kTransportFailure,
                        "unintelligible login reply");

  SessionKey session =
      user_confirm_session(*resp, pending, secrets, policy, cp_);
  return LoginResult{session, card.mid};
}

Bytes UserAgent::echo(const LoginResult& session,
                      std::span<const uint8_t> message) {
  SymmetricKey k_echo = derive_echo_key(session.session);
  Bytes reply = request_reply(transport_,
                              topic_prefix_echo(config_.gateway_id),
                              encode_echo_request(session.mid, k_echo, message),
                              rng_, config_.timeout);
  if (reply.size() == 1 && reply[0] == kFrameFailure)
    throw ProtocolError(ErrKind::kGatewayAuthFailure,
                        "gateway rejected the echo");
  auto plaintext = open_echo_reply(reply, k_echo);
  if (!plaintext)
    throw ProtocolError(ErrKind::kGatewayAuthFailure,
                        "echo reply failed integrity verification");
  return *plaintext;
}

void UserAgent::update_password(const std::string& name,
                                const Password& pw_old,
                                const Password& pw_new) {
  Identity id = Identity::from_name(name);
  SmartCard card = load_card();
  UserSetupSecrets secrets = load_device();
  SmartCard updated = password_update(card, id, pw_old, pw_new, secrets, cp_);
  write_file_private(config_.card_path, encode_card_file(updated));
}

}  // namespace ugw
