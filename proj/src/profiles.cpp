// Pinned protocol constants. Everything interoperability-relevant is fixed
// here as text:
//
//   hash           SHA-1 (160-bit output; 20-byte digests everywhere)
//   point encoding x || y, each coordinate 20-byte big-endian, 40 bytes total;
//                  the identity element has no encoding
//   scalar files   24-byte big-endian (local state files only, never wire)
//   integers       big-endian on the wire (timestamps 4 bytes, counters 4)
//
// Two parameter profiles:
//
//   paper160  SECG secp160r1. 160-bit prime field, cofactor 1, prime group
//             order n (161 bits). The deployment profile.
//   tiny97    y^2 = x^3 + 2x + 3 over GF(97). The full group has 100 points
//             and is NOT cyclic (largest point order 50), so the generator
//             is pinned to (0, 10), whose 50-element subgroup the protocol
//             runs in. Small enough to enumerate exhaustively in tests.

#include <stdexcept>

#include "ugw/curve.hpp"

namespace ugw {

namespace {

CurveParams make_paper160() {
  CurveParams cp;
  cp.id = "paper160";
  cp.p = BigInt("0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFF");
  cp.a = BigInt("0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFC");  // p - 3
  cp.b = BigInt("0x1C97BEFC54BD7A8B65ACF89F81D4D4ADC565FA45");
  cp.g = CurvePoint{BigInt("0x4A96B5688EF573284664698968C38BB913CBFC82"),
                    BigInt("0x23A628553168947D59DCC912042351377AC5FB32"), false};
  cp.n = BigInt("0x0100000000000000000001F4C8F927AED3CA752257");
  return cp;
}

CurveParams make_tiny97() {
  CurveParams cp;
  cp.id = "tiny97";
  cp.p = 97;
  cp.a = 2;
  cp.b = 3;
  cp.g = CurvePoint{0, 10, false};
  cp.n = 50;
  return cp;
}

}  // namespace

const CurveParams& paper160() {
  static const CurveParams cp = make_paper160();
  return cp;
}

const CurveParams& tiny97() {
  static const CurveParams cp = make_tiny97();
  return cp;
}

const CurveParams& profile(std::string_view id) {
  if (id == "paper160") return paper160();
  if (id == "tiny97") return tiny97();
  throw std::invalid_argument("unknown curve profile: " + std::string(id));
}

}  // namespace ugw
