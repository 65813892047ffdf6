#pragma once

#include <optional>

#include "ugw/protocol.hpp"

namespace ugw {

// Fixed-width big-endian serialization for everything that crosses a
// process boundary: protocol messages, service frames, and the local state
// files (card, device state). Decoders are strict — any length or
// structure violation yields nullopt and the caller drops the frame.

// -- protocol messages (the two public-channel widths are load-bearing:
//    672 + 320 bits is the scheme's entire communication cost) --

constexpr size_t kLoginRequestBytes = 84;   // pid 20 | t_ki 4 | mid 20 | z 40
constexpr size_t kAuthResponseBytes = 40;   // sq 20 | ns 16 | t_k_new 4
constexpr size_t kRegistrationRequestBytes = 40;  // uid 20 | h_i 20

Bytes encode_login_request(const LoginRequest& msg);
std::optional<LoginRequest> decode_login_request(std::span<const uint8_t> raw);

Bytes encode_auth_response(const AuthResponse& msg);
std::optional<AuthResponse> decode_auth_response(std::span<const uint8_t> raw);

Bytes encode_registration_request(const RegistrationRequest& msg);
std::optional<RegistrationRequest> decode_registration_request(
    std::span<const uint8_t> raw);

// -- service frames (secure registration channel; carries the out-of-band
//    setup exchange and the registration in one round trip) --

constexpr size_t kRegisterFrameBytes = 80;       // d_u 40 | uid 20 | h_i 20
constexpr size_t kRegisterReplyBytes = 100;      // s_i 40 | o_i/mid/x_i 20 each

struct RegisterFrame {
  std::array<uint8_t, CurveParams::kPointBytes> d_u{};
  RegistrationRequest request;
};

struct RegisterReply {
  std::array<uint8_t, CurveParams::kPointBytes> s_i{};
  IssuedCard issued;
};

Bytes encode_register_frame(const RegisterFrame& msg);
std::optional<RegisterFrame> decode_register_frame(std::span<const uint8_t> raw);

Bytes encode_register_reply(const RegisterReply& msg);
std::optional<RegisterReply> decode_register_reply(std::span<const uint8_t> raw);

// Failure frames are length-discriminated from success frames (a login
// response is always 40 bytes, a registration reply always 100). Login
// failures are a single zero byte regardless of cause; registration
// failures carry one cause code (the paper's "Identity not available"
// needs to be distinguishable so the user doesn't retry forever).
constexpr uint8_t kFrameFailure = 0x00;
constexpr uint8_t kRegFailIdentityTaken = 0x01;
constexpr uint8_t kRegFailMalformed = 0x02;

Bytes login_failure_frame();
Bytes register_failure_frame(uint8_t code);

// -- request/response transport envelope --
// Requests carry an 8-byte client nonce so the response can be published
// to ".../resp/<nonce-hex>". The nonce is transport addressing, exactly
// like the MQTT packet headers around it; it is not part of the protocol
// message and not part of the bit accounting.

constexpr size_t kEnvelopeNonceBytes = 8;

Bytes envelope_wrap(std::span<const uint8_t> nonce, std::span<const uint8_t> body);
struct Envelope {
  std::array<uint8_t, kEnvelopeNonceBytes> nonce{};
  Bytes body;
};
std::optional<Envelope> envelope_open(std::span<const uint8_t> raw);

// -- echo frames (post-login session-key demonstration) --
//   request:  mid 20 | ciphertext N | tag 20     (tag = hash(k_echo || ct))
//   response: ciphertext N | tag 20, or the 1-byte failure frame
// k_echo = first 16 bytes of hash(s_k || "ECHO"); contexts differ per
// direction so a reflected frame never verifies.

inline constexpr std::string_view kCtxEchoUser = "ECHOME";
inline constexpr std::string_view kCtxEchoGateway = "ECHOGW";

SymmetricKey derive_echo_key(const SessionKey& session);

Bytes encode_echo_request(const Digest160& mid, const SymmetricKey& k_echo,
                          std::span<const uint8_t> plaintext);
struct EchoRequest {
  Digest160 mid;
  Bytes ciphertext;
  Digest160 tag;
};
std::optional<EchoRequest> decode_echo_request(std::span<const uint8_t> raw);

Bytes encode_echo_reply(const SymmetricKey& k_echo,
                        std::span<const uint8_t> plaintext);
// Verifies the tag and decrypts; nullopt on any mismatch.
std::optional<Bytes> open_echo_request(const EchoRequest& req,
                                       const SymmetricKey& k_echo);
std::optional<Bytes> open_echo_reply(std::span<const uint8_t> raw,
                                     const SymmetricKey& k_echo);

// -- local state files --

// Card file: "UGWSC" + profile digit, then o_i | mid | x_i | z_card.
// A paper160 card is exactly 106 bytes and begins with the bytes "UGWSC1".
constexpr size_t kCardFileBytes = 106;

Bytes encode_card_file(const SmartCard& card);
std::optional<SmartCard> decode_card_file(std::span<const uint8_t> raw);

// Device-state file: "UGWDS" + profile digit | ur_i 24 | s_i 40 | crc 4.
// Holds the user device's confidential memory; d_u and k_u are rederived
// on load so the file stays minimal.
constexpr size_t kDeviceFileBytes = 74;

Bytes encode_device_state(const UserSetupSecrets& secrets,
                          const CurveParams& cp);
std::optional<UserSetupSecrets> decode_device_state(
    std::span<const uint8_t> raw, const CurveParams& cp);

// Profile <-> file-format digit ('1' = paper160, '2' = tiny97).
char profile_digit(const CurveParams& cp);
const CurveParams* profile_from_digit(char digit);  // nullptr if unknown

}  // namespace ugw
