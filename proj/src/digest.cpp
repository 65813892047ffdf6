#include "ugw/digest.hpp"

#include <cstring>
#include <stdexcept>

#include "ugw/opcount.hpp"
#include "ugw/sha1.hpp"

namespace ugw {

Digest160 Digest160::from(std::span<const uint8_t> raw) {
  if (raw.size() != kSize)
    throw std::invalid_argument("Digest160: need exactly 20 bytes");
  Digest160 d;
  std::memcpy(d.v.data(), raw.data(), kSize);
  return d;
}

Digest160 hash160(std::span<const uint8_t> data) {
  ops::tick_hash();
  Digest160 d;
  d.v = Sha1::digest(data);
  return d;
}

Digest160 hash160_cat(std::initializer_list<std::span<const uint8_t>> parts) {
  ops::tick_hash();
  Sha1 h;
  for (const auto& p : parts) h.update(p);
  Digest160 d;
  d.v = h.finish();
  return d;
}

}  // namespace ugw
