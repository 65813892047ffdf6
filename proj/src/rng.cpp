#include "ugw/rng.hpp"

namespace ugw {

Scalar Rng::scalar(const CurveParams& cp) {
  unsigned bits = boost::multiprecision::msb(cp.n) + 1;
  size_t nbytes = (bits + 64 + 7) / 8;
  BigInt v = 0;
  for (size_t i = 0; i < nbytes; ++i) v = (v << 8) | byte();
  return Scalar{v % (cp.n - 1) + 1};
}

uint64_t Rng::below(uint64_t bound) {
  std::uniform_int_distribution<uint64_t> dist(0, bound - 1);
  return dist(engine_);
}

}  // namespace ugw
