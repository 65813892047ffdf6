#pragma once

#include <cstdint>
#include <random>

#include "ugw/bytes.hpp"
#include "ugw/curve.hpp"

namespace ugw {

// Deterministic random source. Every protocol operation that draws
// randomness takes one of these, so a fixed seed reproduces a whole run
// bit-for-bit — the acceptance checks and the attack harness depend on
// that. Production entry points seed from the system source.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  static Rng from_system_entropy() {
    std::random_device rd;
    return Rng((uint64_t(rd()) << 32) | rd());
  }

  uint8_t byte() { return static_cast<uint8_t>(engine_() & 0xff); }

  Bytes bytes(size_t n) {
    Bytes out(n);
    for (auto& b : out) b = byte();
    return out;
  }

  // Uniform-enough scalar in [1, n-1]: draw bitlen(n) + 64 extra bits and
  // reduce; the 64-bit surplus pushes modulo bias below anything the test
  // statistics can see.
  Scalar scalar(const CurveParams& cp);

  // Uniform integer in [0, bound) by rejection (exact, for small bounds).
  uint64_t below(uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

inline Scalar random_scalar(Rng& rng, const CurveParams& cp) {
  return rng.scalar(cp);
}

}  // namespace ugw
