#pragma once

#include <array>
#include <string_view>

#include "ugw/curve.hpp"
#include "ugw/digest.hpp"

namespace ugw {

// 128-bit symmetric key derived from a curve point.
struct SymmetricKey {
  static constexpr size_t kSize = 16;
  std::array<uint8_t, kSize> v{};

  bool operator==(const SymmetricKey&) const = default;
  std::span<const uint8_t> bytes() const { return {v.data(), v.size()}; }
};

// Key derivation from a shared curve point: first 16 bytes of
// hash(label || x || y). The label separates the card-unlock key from the
// user<->gateway channel key even if the underlying points ever coincided.
// Rejects the identity (it has no encoding, and a DH result of identity
// means a protocol precondition was already broken).
SymmetricKey kbkdf(const CurvePoint& shared, std::string_view label,
                   const CurveParams& cp);

// Password / arbitrary bytes -> scalar in [1, n-1]:
//   (int(hash(data)) mod (n-1)) + 1
// Never zero, never >= n, no rejection loop.
Scalar hash_to_scalar(std::span<const uint8_t> data, const CurveParams& cp);

}  // namespace ugw
