#include "ugw/curve.hpp"

#include <stdexcept>
#include <vector>

#include "ugw/opcount.hpp"

namespace ugw {

namespace {

BigInt mod_add(const BigInt& a, const BigInt& b, const BigInt& p) {
  BigInt r = a + b;
  if (r >= p) r -= p;
  return r;
}

BigInt mod_sub(const BigInt& a, const BigInt& b, const BigInt& p) {
  return a >= b ? a - b : p - (b - a);
}

BigInt mod_mul(const BigInt& a, const BigInt& b, const BigInt& p) {
  return (a * b) % p;
}

// Fermat inverse; p is prime in every supported profile. Throws on zero,
// which only happens if a group-law precondition was already violated.
BigInt mod_inv(const BigInt& a, const BigInt& p) {
  if (a == 0) throw std::domain_error("field inverse of zero");
  return boost::multiprecision::powm(a, p - 2, p);
}

void require_on_curve(const CurvePoint& pt, const CurveParams& cp,
                      const char* who) {
  if (!on_curve(pt, cp))
    throw std::invalid_argument(std::string(who) + ": point not on curve");
}

// Internal Jacobian representation: (X, Y, Z) with x = X/Z^2, y = Y/Z^3.
// Z == 0 encodes the identity. Used only inside scalar_mul so the whole
// ladder costs a single field inversion.
struct Jac {
  BigInt X, Y, Z;

  static Jac infinity() { return {1, 1, 0}; }
  static Jac from_affine(const CurvePoint& pt) {
    if (pt.identity) return infinity();
    return {pt.x, pt.y, 1};
  }
  bool is_infinity() const { return Z == 0; }
};

Jac jac_double(const Jac& q, const CurveParams& cp) {
  const BigInt& p = cp.p;
  if (q.is_infinity() || q.Y == 0) return Jac::infinity();
  BigInt ysq = mod_mul(q.Y, q.Y, p);
  BigInt s = mod_mul(4, mod_mul(q.X, ysq, p), p);
  BigInt zsq = mod_mul(q.Z, q.Z, p);
  // m = 3*X^2 + a*Z^4 (general 'a'; neither profile has a = 0)
  BigInt m = mod_add(mod_mul(3, mod_mul(q.X, q.X, p), p),
                     mod_mul(cp.a, mod_mul(zsq, zsq, p), p), p);
  BigInt x3 = mod_sub(mod_mul(m, m, p), mod_mul(2, s, p), p);
  BigInt y3 = mod_sub(mod_mul(m, mod_sub(s, x3, p), p),
                      mod_mul(8, mod_mul(ysq, ysq, p), p), p);
  BigInt z3 = mod_mul(mod_mul(2, q.Y, p), q.Z, p);
  return {x3, y3, z3};
}

Jac jac_add(const Jac& q1, const Jac& q2, const CurveParams& cp) {
  const BigInt& p = cp.p;
  if (q1.is_infinity()) return q2;
  if (q2.is_infinity()) return q1;
  BigInt z1sq = mod_mul(q1.Z, q1.Z, p);
  BigInt z2sq = mod_mul(q2.Z, q2.Z, p);
  BigInt u1 = mod_mul(q1.X, z2sq, p);
  BigInt u2 = mod_mul(q2.X, z1sq, p);
  BigInt s1 = mod_mul(q1.Y, mod_mul(z2sq, q2.Z, p), p);
  BigInt s2 = mod_mul(q2.Y, mod_mul(z1sq, q1.Z, p), p);
  if (u1 == u2) {
    if (s1 != s2) return Jac::infinity();  // q2 == -q1
    return jac_double(q1, cp);             // q2 == q1
  }
  BigInt h = mod_sub(u2, u1, p);
  BigInt r = mod_sub(s2, s1, p);
  BigInt hsq = mod_mul(h, h, p);
  BigInt hcu = mod_mul(hsq, h, p);
  BigInt v = mod_mul(u1, hsq, p);
  BigInt x3 = mod_sub(mod_sub(mod_mul(r, r, p), hcu, p), mod_mul(2, v, p), p);
  BigInt y3 = mod_sub(mod_mul(r, mod_sub(v, x3, p), p), mod_mul(s1, hcu, p), p);
  BigInt z3 = mod_mul(mod_mul(q1.Z, q2.Z, p), h, p);
  return {x3, y3, z3};
}

CurvePoint jac_to_affine(const Jac& q, const CurveParams& cp) {
  if (q.is_infinity()) return CurvePoint::infinity();
  const BigInt& p = cp.p;
  BigInt zinv = mod_inv(q.Z, p);
  BigInt zinv2 = mod_mul(zinv, zinv, p);
  return {mod_mul(q.X, zinv2, p), mod_mul(q.Y, mod_mul(zinv2, zinv, p), p),
          false};
}

void put_coord(Bytes& out, const BigInt& v) {
  uint8_t buf[CurveParams::kCoordBytes] = {};
  BigInt t = v;
  for (size_t i = CurveParams::kCoordBytes; i-- > 0;) {
    buf[i] = static_cast<uint8_t>(t & 0xff);
    t >>= 8;
  }
  out.insert(out.end(), buf, buf + sizeof(buf));
}

BigInt get_big(std::span<const uint8_t> raw) {
  BigInt v = 0;
  for (uint8_t byte : raw) v = (v << 8) | byte;
  return v;
}

}  // namespace

bool on_curve(const CurvePoint& pt, const CurveParams& cp) {
  if (pt.identity) return true;
  if (pt.x >= cp.p || pt.y >= cp.p) return false;
  BigInt lhs = mod_mul(pt.y, pt.y, cp.p);
  BigInt rhs = mod_add(
      mod_add(mod_mul(mod_mul(pt.x, pt.x, cp.p), pt.x, cp.p),
              mod_mul(cp.a, pt.x, cp.p), cp.p),
      cp.b, cp.p);
  return lhs == rhs;
}

CurvePoint point_add(const CurvePoint& lhs, const CurvePoint& rhs,
                     const CurveParams& cp) {
  require_on_curve(lhs, cp, "point_add");
  require_on_curve(rhs, cp, "point_add");
  ops::tick_point_add();

  if (lhs.identity) return rhs;
  if (rhs.identity) return lhs;
  const BigInt& p = cp.p;
  BigInt slope;
  if (lhs.x == rhs.x) {
    if (mod_add(lhs.y, rhs.y, p) == 0) return CurvePoint::infinity();
    // tangent: (3x^2 + a) / 2y
    slope = mod_mul(mod_add(mod_mul(3, mod_mul(lhs.x, lhs.x, p), p), cp.a, p),
                    mod_inv(mod_mul(2, lhs.y, p), p), p);
  } else {
    slope = mod_mul(mod_sub(rhs.y, lhs.y, p),
                    mod_inv(mod_sub(rhs.x, lhs.x, p), p), p);
  }
  BigInt x3 = mod_sub(mod_sub(mod_mul(slope, slope, p), lhs.x, p), rhs.x, p);
  BigInt y3 = mod_sub(mod_mul(slope, mod_sub(lhs.x, x3, p), p), lhs.y, p);
  return {x3, y3, false};
}

CurvePoint point_negate(const CurvePoint& pt, const CurveParams& cp) {
  require_on_curve(pt, cp, "point_negate");
  if (pt.identity) return pt;
  return {pt.x, pt.y == 0 ? BigInt(0) : cp.p - pt.y, false};
}

CurvePoint scalar_mul(const Scalar& k, const CurvePoint& pt,
                      const CurveParams& cp) {
  if (k.v == 0 || k.v >= cp.n)
    throw std::invalid_argument("scalar_mul: scalar outside [1, n-1]");
  require_on_curve(pt, cp, "scalar_mul");
  ops::tick_point_mul();

  if (pt.identity) return pt;

  // Montgomery ladder, MSB first. The invariant r1 - r0 == pt holds for
  // every step; jac_add copes with the doubling / inverse-pair collisions
  // that small-order points hit, so the ladder is exact on both profiles.
  Jac r0 = Jac::from_affine(pt);
  Jac r1 = jac_double(r0, cp);
  unsigned bits = boost::multiprecision::msb(k.v);  // k.v >= 1
  for (unsigned i = bits; i-- > 0;) {
    if (boost::multiprecision::bit_test(k.v, i)) {
      r0 = jac_add(r0, r1, cp);
      r1 = jac_double(r1, cp);
    } else {
      r1 = jac_add(r0, r1, cp);
      r0 = jac_double(r0, cp);
    }
  }
  return jac_to_affine(r0, cp);
}

Bytes encode_point(const CurvePoint& pt, const CurveParams& cp) {
  require_on_curve(pt, cp, "encode_point");
  if (pt.identity)
    throw std::invalid_argument("encode_point: identity has no encoding");
  Bytes out;
  out.reserve(CurveParams::kPointBytes);
  put_coord(out, pt.x);
  put_coord(out, pt.y);
  return out;
}

std::optional<CurvePoint> decode_point(std::span<const uint8_t> raw,
                                       const CurveParams& cp) {
  if (raw.size() != CurveParams::kPointBytes) return std::nullopt;
  CurvePoint pt{get_big(raw.first(CurveParams::kCoordBytes)),
                get_big(raw.subspan(CurveParams::kCoordBytes)), false};
  if (pt.x >= cp.p || pt.y >= cp.p) return std::nullopt;
  if (!on_curve(pt, cp)) return std::nullopt;
  return pt;
}

Bytes encode_scalar(const Scalar& s) {
  Bytes out(kScalarBytes, 0);
  BigInt t = s.v;
  for (size_t i = kScalarBytes; i-- > 0;) {
    out[i] = static_cast<uint8_t>(t & 0xff);
    t >>= 8;
  }
  return out;
}

std::optional<Scalar> decode_scalar(std::span<const uint8_t> raw,
                                    const CurveParams& cp) {
  if (raw.size() != kScalarBytes) return std::nullopt;
  Scalar s{get_big(raw)};
  if (s.v == 0 || s.v >= cp.n) return std::nullopt;
  return s;
}

struct MultiplesEnumerator::Impl {
  const CurveParams& cp;
  Jac step;
  Jac acc = Jac::infinity();
  uint64_t index = 0;
  size_t batch;
  std::vector<std::pair<uint64_t, CurvePoint>> ready;  // consumed back-first

  Impl(const CurvePoint& p, const CurveParams& params, size_t batch_size)
      : cp(params), step(Jac::from_affine(p)), batch(batch_size) {}

  void refill() {
    std::vector<std::pair<uint64_t, Jac>> block;
    block.reserve(batch);
    for (size_t i = 0; i < batch; ++i) {
      // acc lands back on the identity every ord(P) steps; jac_add treats
      // the inverse-pair collision correctly and the walk restarts at P.
      acc = acc.is_infinity() ? step : jac_add(acc, step, cp);
      block.emplace_back(index + 1 + i, acc);
    }
    index += block.size();

    // Montgomery's trick: one field inversion for the whole block.
    std::vector<size_t> live;  // indices with Z != 0
    std::vector<BigInt> prefix;
    BigInt running = 1;
    for (size_t i = 0; i < block.size(); ++i) {
      if (block[i].second.is_infinity()) continue;
      running = mod_mul(running, block[i].second.Z, cp.p);
      live.push_back(i);
      prefix.push_back(running);
    }
    std::vector<BigInt> zinv(block.size());
    if (!live.empty()) {
      BigInt inv_all = mod_inv(running, cp.p);
      for (size_t j = live.size(); j-- > 0;) {
        size_t i = live[j];
        zinv[i] = j == 0 ? inv_all : mod_mul(inv_all, prefix[j - 1], cp.p);
        inv_all = mod_mul(inv_all, block[i].second.Z, cp.p);
      }
    }

    ready.reserve(block.size());
    for (size_t i = block.size(); i-- > 0;) {  // back-first consumption order
      const auto& [idx, q] = block[i];
      if (q.is_infinity()) {
        ready.emplace_back(idx, CurvePoint::infinity());
        continue;
      }
      BigInt zi2 = mod_mul(zinv[i], zinv[i], cp.p);
      ready.emplace_back(idx,
                         CurvePoint{mod_mul(q.X, zi2, cp.p),
                                    mod_mul(q.Y, mod_mul(zi2, zinv[i], cp.p),
                                            cp.p),
                                    false});
    }
  }
};

MultiplesEnumerator::MultiplesEnumerator(const CurvePoint& p,
                                         const CurveParams& cp, size_t batch)
    : impl_(std::make_unique<Impl>(p, cp, batch == 0 ? 1 : batch)) {
  if (p.identity || !on_curve(p, cp))
    throw std::invalid_argument("MultiplesEnumerator: bad base point");
}

MultiplesEnumerator::~MultiplesEnumerator() = default;

std::pair<uint64_t, CurvePoint> MultiplesEnumerator::next() {
  if (impl_->ready.empty()) impl_->refill();
  auto out = std::move(impl_->ready.back());
  impl_->ready.pop_back();
  return out;
}

}  // namespace ugw
