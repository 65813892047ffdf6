#include "ugw/cipher.hpp"

#include "ugw/digest.hpp"
#include "ugw/opcount.hpp"

namespace ugw {

namespace {

Bytes keystream_xor(const SymmetricKey& key, std::string_view context,
                    std::span<const uint8_t> input) {
  ops::tick_sym();
  ops::SuppressHashCount guard;  // keystream hashes are cipher internals
  Bytes out;
  out.reserve(input.size());
  Bytes block_counter;
  for (uint32_t block = 0; out.size() < input.size(); ++block) {
    block_counter.clear();
    put_be32(block_counter, block);
    Digest160 ks = hash160_cat({key.bytes(), to_bytes(context), block_counter});
    for (size_t i = 0; i < Digest160::kSize && out.size() < input.size(); ++i)
      out.push_back(input[out.size()] ^ ks.v[i]);
  }
  return out;
}

}  // namespace

Bytes sym_encrypt(const SymmetricKey& key, std::string_view context,
                  std::span<const uint8_t> plaintext) {
  return keystream_xor(key, context, plaintext);
}

Bytes sym_decrypt(const SymmetricKey& key, std::string_view context,
                  std::span<const uint8_t> ciphertext) {
  return keystream_xor(key, context, ciphertext);
}

}  // namespace ugw
