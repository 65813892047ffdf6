#include "ugw/wire.hpp"

#include <cstring>

#include "ugw/opcount.hpp"

namespace ugw {

namespace {

void put_digest(Bytes& out, const Digest160& d) {
  append(out, d.bytes());
}

Digest160 get_digest(std::span<const uint8_t> raw, size_t off) {
  return Digest160::from(raw.subspan(off, Digest160::kSize));
}

template <size_t N>
std::array<uint8_t, N> get_array(std::span<const uint8_t> raw, size_t off) {
  std::array<uint8_t, N> out;
  std::memcpy(out.data(), raw.data() + off, N);
  return out;
}

// 4-byte integrity check for local state files: leading bytes of the
// digest over everything before it. Catches corruption, not adversaries.
std::array<uint8_t, 4> file_crc(std::span<const uint8_t> body) {
  ops::SuppressHashCount guard;
  Digest160 d = hash160(body);
  return {d.v[0], d.v[1], d.v[2], d.v[3]};
}

}  // namespace

// ---------------------------------------------------------------------------
// Protocol messages
// ---------------------------------------------------------------------------

Bytes encode_login_request(const LoginRequest& msg) {
  Bytes out;
  out.reserve(kLoginRequestBytes);
  put_digest(out, msg.pid);
  put_be32(out, msg.t_ki);
  put_digest(out, msg.mid);
  append(out, msg.z_login);
  return out;
}

std::optional<LoginRequest> decode_login_request(std::span<const uint8_t> raw) {
  if (raw.size() != kLoginRequestBytes) return std::nullopt;
  LoginRequest msg;
  msg.pid = get_digest(raw, 0);
  msg.t_ki = get_be32(raw.subspan(20));
  msg.mid = get_digest(raw, 24);
  msg.z_login = get_array<40>(raw, 44);
  return msg;
}

Bytes encode_auth_response(const AuthResponse& msg) {
  Bytes out;
  out.reserve(kAuthResponseBytes);
  put_digest(out, msg.sq_i);
  append(out, msg.ns);
  put_be32(out, msg.t_k_new);
  return out;
}

std::optional<AuthResponse> decode_auth_response(std::span<const uint8_t> raw) {
  if (raw.size() != kAuthResponseBytes) return std::nullopt;
  AuthResponse msg;
  msg.sq_i = get_digest(raw, 0);
  msg.ns = get_array<16>(raw, 20);
  msg.t_k_new = get_be32(raw.subspan(36));
  return msg;
}

Bytes encode_registration_request(const RegistrationRequest& msg) {
  Bytes out;
  out.reserve(kRegistrationRequestBytes);
  put_digest(out, msg.uid);
  put_digest(out, msg.h_i);
  return out;
}

std::optional<RegistrationRequest> decode_registration_request(
    std::span<const uint8_t> raw) {
  if (raw.size() != kRegistrationRequestBytes) return std::nullopt;
  return RegistrationRequest{get_digest(raw, 0), get_digest(raw, 20)};
}

// ---------------------------------------------------------------------------
// Service frames
// ---------------------------------------------------------------------------

Bytes encode_register_frame(const RegisterFrame& msg) {
  Bytes out;
  out.reserve(kRegisterFrameBytes);
  append(out, msg.d_u);
  append(out, encode_registration_request(msg.request));
  return out;
}

std::optional<RegisterFrame> decode_register_frame(
    std::span<const uint8_t> raw) {
  if (raw.size() != kRegisterFrameBytes) return std::nullopt;
  RegisterFrame msg;
  msg.d_u = get_array<40>(raw, 0);
  auto req = decode_registration_request(raw.subspan(40));
  if (!req) return std::nullopt;
  msg.request = *req;
  return msg;
}

Bytes encode_register_reply(const RegisterReply& msg) {
  Bytes out;
  out.reserve(kRegisterReplyBytes);
  append(out, msg.s_i);
  put_digest(out, msg.issued.o_i);
  put_digest(out, msg.issued.mid);
  put_digest(out, msg.issued.x_i);
  return out;
}

std::optional<RegisterReply> decode_register_reply(
    std::span<const uint8_t> raw) {
  if (raw.size() != kRegisterReplyBytes) return std::nullopt;
  RegisterReply msg;
  msg.s_i = get_array<40>(raw, 0);
  msg.issued.o_i = get_digest(raw, 40);
  msg.issued.mid = get_digest(raw, 60);
  msg.issued.x_i = get_digest(raw, 80);
  return msg;
}

Bytes login_failure_frame() { return Bytes{kFrameFailure}; }

Bytes register_failure_frame(uint8_t code) {
  return Bytes{kFrameFailure, code};
}

// ---------------------------------------------------------------------------
// Transport envelope
// ---------------------------------------------------------------------------

Bytes envelope_wrap(std::span<const uint8_t> nonce,
                    std::span<const uint8_t> body) {
  Bytes out;
  out.reserve(nonce.size() + body.size());
  append(out, nonce);
  append(out, body);
  return out;
}

std::optional<Envelope> envelope_open(std::span<const uint8_t> raw) {
  if (raw.size() < kEnvelopeNonceBytes) return std::nullopt;
  Envelope env;
  std::memcpy(env.nonce.data(), raw.data(), kEnvelopeNonceBytes);
  env.body.assign(raw.begin() + kEnvelopeNonceBytes, raw.end());
  return env;
}

// ---------------------------------------------------------------------------
// Echo frames
// ---------------------------------------------------------------------------

SymmetricKey derive_echo_key(const SessionKey& session) {
  ops::SuppressHashCount guard;
  Digest160 d = hash160_cat({session.s_k.bytes(), to_bytes("ECHO")});
  SymmetricKey key;
  std::memcpy(key.v.data(), d.v.data(), SymmetricKey::kSize);
  return key;
}

namespace {

Digest160 echo_tag(const SymmetricKey& k_echo,
                   std::span<const uint8_t> ciphertext) {
  ops::SuppressHashCount guard;
  return hash160_cat({k_echo.bytes(), ciphertext});
}

}  // namespace

Bytes encode_echo_request(const Digest160& mid, const SymmetricKey& k_echo,
                          std::span<const uint8_t> plaintext) {
  Bytes ct = sym_encrypt(k_echo, kCtxEchoUser, plaintext);
  Bytes out;
  out.reserve(20 + ct.size() + 20);
  put_digest(out, mid);
  append(out, ct);
  put_digest(out, echo_tag(k_echo, ct));
  return out;
}

std::optional<EchoRequest> decode_echo_request(std::span<const uint8_t> raw) {
  if (raw.size() < 40) return std::nullopt;
  EchoRequest req;
  req.mid = get_digest(raw, 0);
  req.ciphertext.assign(raw.begin() + 20, raw.end() - 20);
  req.tag = get_digest(raw, raw.size() - 20);
  return req;
}

std::optional<Bytes> open_echo_request(const EchoRequest& req,
                                       const SymmetricKey& k_echo) {
  if (echo_tag(k_echo, req.ciphertext) != req.tag) return std::nullopt;
  return sym_decrypt(k_echo, kCtxEchoUser, req.ciphertext);
}

Bytes encode_echo_reply(const SymmetricKey& k_echo,
                        std::span<const uint8_t> plaintext) {
  Bytes ct = sym_encrypt(k_echo, kCtxEchoGateway, plaintext);
  Bytes out;
  out.reserve(ct.size() + 20);
  append(out, ct);
  put_digest(out, echo_tag(k_echo, ct));
  return out;
}

std::optional<Bytes> open_echo_reply(std::span<const uint8_t> raw,
                                     const SymmetricKey& k_echo) {
  if (raw.size() < 20) return std::nullopt;
  std::span<const uint8_t> ct = raw.first(raw.size() - 20);
  Digest160 tag = get_digest(raw, raw.size() - 20);
  if (echo_tag(k_echo, ct) != tag) return std::nullopt;
  return sym_decrypt(k_echo, kCtxEchoGateway, ct);
}

// ---------------------------------------------------------------------------
// Local state files
// ---------------------------------------------------------------------------

char profile_digit(const CurveParams& cp) {
  return cp.id == "paper160" ? '1' : '2';
}

const CurveParams* profile_from_digit(char digit) {
  if (digit == '1') return &paper160();
  if (digit == '2') return &tiny97();
  return nullptr;
}

Bytes encode_card_file(const SmartCard& card) {
  Bytes out;
  out.reserve(kCardFileBytes);
  append(out, to_bytes("UGWSC"));
  out.push_back(static_cast<uint8_t>(profile_digit(profile(card.profile_id))));
  put_digest(out, card.o_i);
  put_digest(out, card.mid);
  put_digest(out, card.x_i);
  append(out, card.z_card);
  return out;
}

std::optional<SmartCard> decode_card_file(std::span<const uint8_t> raw) {
  if (raw.size() != kCardFileBytes) return std::nullopt;
  if (std::memcmp(raw.data(), "UGWSC", 5) != 0) return std::nullopt;
  const CurveParams* cp = profile_from_digit(static_cast<char>(raw[5]));
  if (!cp) return std::nullopt;
  SmartCard card;
  card.profile_id = cp->id;
  card.o_i = get_digest(raw, 6);
  card.mid = get_digest(raw, 26);
  card.x_i = get_digest(raw, 46);
  card.z_card = get_array<40>(raw, 66);
  return card;
}

Bytes encode_device_state(const UserSetupSecrets& secrets,
                          const CurveParams& cp) {
  Bytes out;
  out.reserve(kDeviceFileBytes);
  append(out, to_bytes("UGWDS"));
  out.push_back(static_cast<uint8_t>(profile_digit(cp)));
  append(out, encode_scalar(secrets.ur_i));
  append(out, encode_point(secrets.s_i, cp));
  auto crc = file_crc(out);
  append(out, crc);
  return out;
}

std::optional<UserSetupSecrets> decode_device_state(
    std::span<const uint8_t> raw, const CurveParams& cp) {
  if (raw.size() != kDeviceFileBytes) return std::nullopt;
  if (std::memcmp(raw.data(), "UGWDS", 5) != 0) return std::nullopt;
  if (static_cast<char>(raw[5]) != profile_digit(cp)) return std::nullopt;
  if (file_crc(raw.first(raw.size() - 4)) != get_array<4>(raw, raw.size() - 4))
    return std::nullopt;
  auto ur_i = decode_scalar(raw.subspan(6, kScalarBytes), cp);
  auto s_i = decode_point(raw.subspan(6 + kScalarBytes, 40), cp);
  if (!ur_i || !s_i) return std::nullopt;
  UserSetupSecrets secrets;
  secrets.ur_i = *ur_i;
  secrets.d_u = scalar_mul(*ur_i, cp.g, cp);
  secrets.s_i = *s_i;
  CurvePoint shared = scalar_mul(*ur_i, *s_i, cp);
  if (shared.identity) return std::nullopt;
  secrets.k_u = kbkdf(shared, kKdfChannel, cp);
  return secrets;
}

}  // namespace ugw
