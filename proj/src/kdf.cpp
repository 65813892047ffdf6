#include "ugw/kdf.hpp"

#include <cstring>
#include <stdexcept>

#include "ugw/opcount.hpp"

namespace ugw {

SymmetricKey kbkdf(const CurvePoint& shared, std::string_view label,
                   const CurveParams& cp) {
  if (shared.identity)
    throw std::invalid_argument("kbkdf: identity point has no key");
  ops::SuppressHashCount guard;  // inner hash is KDF detail, not a protocol op
  Bytes pt = encode_point(shared, cp);
  Digest160 d = hash160_cat({to_bytes(label), pt});
  SymmetricKey key;
  std::memcpy(key.v.data(), d.v.data(), SymmetricKey::kSize);
  return key;
}

Scalar hash_to_scalar(std::span<const uint8_t> data, const CurveParams& cp) {
  ops::SuppressHashCount guard;
  Digest160 d = hash160(data);
  BigInt v = 0;
  for (uint8_t byte : d.v) v = (v << 8) | byte;
  return Scalar{v % (cp.n - 1) + 1};
}

}  // namespace ugw
