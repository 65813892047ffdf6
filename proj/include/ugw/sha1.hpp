#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace ugw {

// SHA-1 (FIPS 180-1). 160-bit digest, the hash width the whole protocol is
// built around. Streaming interface so callers can absorb multi-part input
// without concatenating.
class Sha1 {
 public:
  static constexpr size_t kDigestSize = 20;

  Sha1() { reset(); }

  void reset();
  void update(std::span<const uint8_t> data);
  std::array<uint8_t, kDigestSize> finish();

  static std::array<uint8_t, kDigestSize> digest(std::span<const uint8_t> data) {
    Sha1 h;
    h.update(data);
    return h.finish();
  }

 private:
  void compress(const uint8_t block[64]);

  uint32_t state_[5];
  uint64_t total_len_;
  uint8_t buf_[64];
  size_t buf_len_;
};

}  // namespace ugw
