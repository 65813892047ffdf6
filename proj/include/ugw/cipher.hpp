#pragma once

#include <string_view>

#include "ugw/bytes.hpp"
#include "ugw/kdf.hpp"

namespace ugw {

// Deterministic length-preserving symmetric cipher: XOR with a hash-derived
// keystream. Block i of the stream is hash(key || context || be32(i)); the
// context string separates the four protocol uses (MID, card blob, login
// blob, gateway nonce) so equal plaintexts under one key still yield
// unrelated ciphertexts across contexts.
//
// Deterministic by design: the protocol relies on Enc_K(uid) being a stable
// pseudonym across sessions. Encryption and decryption are the same
// operation; both count one symmetric-op tick.
Bytes sym_encrypt(const SymmetricKey& key, std::string_view context,
                  std::span<const uint8_t> plaintext);
Bytes sym_decrypt(const SymmetricKey& key, std::string_view context,
                  std::span<const uint8_t> ciphertext);

}  // namespace ugw
