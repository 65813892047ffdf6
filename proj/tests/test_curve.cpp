#include <map>
#include <set>

#include "doctest.h"
#include "ugw/curve.hpp"
#include "ugw/rng.hpp"

using namespace ugw;

namespace {

CurvePoint pt(unsigned x, unsigned y) { return CurvePoint{x, y, false}; }

Scalar sc(uint64_t k) { return Scalar{k}; }

// Hex-pinned point for the 160-bit profile.
CurvePoint pt160(const char* x, const char* y) {
  return CurvePoint{BigInt(x), BigInt(y), false};
}

}  // namespace

// ---------------------------------------------------------------------------
// tiny97: y^2 = x^3 + 2x + 3 mod 97, G = (0, 10), |<G>| = 50.
// The multiples below were tabulated with an independent implementation
// before this code existed; they pin the group law, not the other way round.
// ---------------------------------------------------------------------------

TEST_CASE("tiny97 pinned multiples of the generator") {
  const CurveParams& cp = tiny97();
  REQUIRE(cp.g == pt(0, 10));
  REQUIRE(cp.n == 50);

  CHECK(scalar_mul(sc(3), cp.g, cp) == pt(23, 24));
  CHECK(scalar_mul(sc(7), cp.g, cp) == pt(10, 76));

  // 3G + 7G = 10G, computed both ways.
  CurvePoint sum = point_add(pt(23, 24), pt(10, 76), cp);
  CHECK(sum == scalar_mul(sc(10), cp.g, cp));
  CHECK(sum == pt(80, 10));
}

TEST_CASE("tiny97 subgroup is exhaustively consistent") {
  const CurveParams& cp = tiny97();

  // Repeated addition walks the whole subgroup; scalar_mul must agree at
  // every index, and all 49 non-identity multiples must be distinct.
  std::set<std::pair<unsigned, unsigned>> seen;
  CurvePoint walk = cp.g;
  for (uint64_t k = 1; k < 50; ++k) {
    CurvePoint fast = scalar_mul(sc(k), cp.g, cp);
    REQUIRE(fast == walk);
    REQUIRE(!fast.identity);
    REQUIRE(on_curve(fast, cp));
    auto key = std::make_pair(unsigned(fast.x), unsigned(fast.y));
    REQUIRE(seen.insert(key).second);
    walk = point_add(walk, cp.g, cp);
  }
  // After 49 steps the walk sits at 49G = -G; one more step closes the cycle.
  CHECK(walk.identity);
  CHECK(point_add(scalar_mul(sc(49), cp.g, cp), cp.g, cp).identity);
}

TEST_CASE("tiny97 full curve has 100 points, so the group is not cyclic") {
  const CurveParams& cp = tiny97();
  size_t count = 1;  // identity
  for (unsigned x = 0; x < 97; ++x) {
    unsigned rhs = (x * x % 97 * x + 2 * x + 3) % 97;
    for (unsigned y = 0; y < 97; ++y)
      if (y * y % 97 == rhs) {
        ++count;
        REQUIRE(on_curve(pt(x, y), cp));
      }
  }
  CHECK(count == 100);  // 2 * |<G>|: G generates an index-2 subgroup
}

TEST_CASE("two-torsion points double to the identity") {
  const CurveParams& cp = tiny97();
  // The three roots of x^3 + 2x + 3 mod 97 give the points with y = 0.
  for (unsigned x : {30u, 68u, 96u}) {
    CurvePoint p2 = pt(x, 0);
    REQUIRE(on_curve(p2, cp));
    CHECK(point_add(p2, p2, cp).identity);
  }
}

TEST_CASE("identity and inverse behave as group axioms demand") {
  const CurveParams& cp = tiny97();
  CurvePoint inf = CurvePoint::infinity();
  CurvePoint g = cp.g;

  CHECK(point_add(g, inf, cp) == g);
  CHECK(point_add(inf, g, cp) == g);
  CHECK(point_add(inf, inf, cp).identity);

  CurvePoint neg = point_negate(g, cp);
  CHECK(on_curve(neg, cp));
  CHECK(point_add(g, neg, cp).identity);
  CHECK(point_negate(inf, cp).identity);
}

TEST_CASE("off-curve and out-of-range inputs are rejected") {
  const CurveParams& cp = tiny97();
  CurvePoint bogus = pt(1, 1);  // 1 != 1 + 2 + 3 mod 97
  REQUIRE(!on_curve(bogus, cp));

  CHECK_THROWS_AS(point_add(bogus, cp.g, cp), std::invalid_argument);
  CHECK_THROWS_AS(point_add(cp.g, bogus, cp), std::invalid_argument);
  CHECK_THROWS_AS(scalar_mul(sc(3), bogus, cp), std::invalid_argument);

  CHECK_THROWS_AS(scalar_mul(Scalar{0}, cp.g, cp), std::invalid_argument);
  CHECK_THROWS_AS(scalar_mul(Scalar{cp.n}, cp.g, cp), std::invalid_argument);
  CHECK_THROWS_AS(scalar_mul(Scalar{cp.n + 1}, cp.g, cp),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// paper160 profile. The pinned products below come from an independent
// big-integer implementation of the same curve equation.
// ---------------------------------------------------------------------------

TEST_CASE("paper160 pinned scalar products") {
  const CurveParams& cp = paper160();

  CHECK(scalar_mul(sc(2), cp.g, cp) ==
        pt160("0x02f997f33c5ed04c55d3edf8675d3e92e8f46686",
              "0xf083a323482993e9440e817e21cfb7737df8797b"));
  CHECK(scalar_mul(sc(3), cp.g, cp) ==
        pt160("0x7b76ff541ef363f2df13de1650bd48daa958bc59",
              "0xc915ca790d8c8877b55be0079d12854ffe9f6f5a"));
  CHECK(scalar_mul(sc(0xDEADBEEF), cp.g, cp) ==
        pt160("0xe0339b3160311f83273cc1c108d126347876909e",
              "0x719561e79be28cde632a795d02c33f2935924d2a"));
}

TEST_CASE("paper160 generator has the pinned order") {
  const CurveParams& cp = paper160();
  // (n-1)G = -G, and one more addition of G reaches the identity.
  CurvePoint last = scalar_mul(Scalar{cp.n - 1}, cp.g, cp);
  CHECK(last == point_negate(cp.g, cp));
  CHECK(last ==
        pt160("0x4a96b5688ef573284664698968c38bb913cbfc82",
              "0xdc59d7aace976b82a62336edfbdcaec8053a04cd"));
  CHECK(point_add(last, cp.g, cp).identity);
}

TEST_CASE("scalar multiplication respects the additive structure") {
  const CurveParams& cp = paper160();
  Rng rng(0x5ca1ab1e);
  for (int trial = 0; trial < 8; ++trial) {
    Scalar a = rng.scalar(cp);
    Scalar b = rng.scalar(cp);
    BigInt s = a.v + b.v;
    if (s >= cp.n) s -= cp.n;
    if (s == 0) continue;

    CurvePoint lhs = point_add(scalar_mul(a, cp.g, cp),
                               scalar_mul(b, cp.g, cp), cp);
    CurvePoint rhs = scalar_mul(Scalar{s}, cp.g, cp);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("point addition is associative on sampled triples") {
  const CurveParams& cp = paper160();
  Rng rng(0xa55a);
  for (int trial = 0; trial < 6; ++trial) {
    CurvePoint a = scalar_mul(rng.scalar(cp), cp.g, cp);
    CurvePoint b = scalar_mul(rng.scalar(cp), cp.g, cp);
    CurvePoint c = scalar_mul(rng.scalar(cp), cp.g, cp);
    CHECK(point_add(point_add(a, b, cp), c, cp) ==
          point_add(a, point_add(b, c, cp), cp));
  }
}

TEST_CASE("two-party key agreement lands on the pinned shared point") {
  const CurveParams& cp = paper160();
  Scalar da{BigInt("0x1234567890ABCDEF1234567890ABCDEF12345678")};
  Scalar db{BigInt("0x0FEDCBA9876543210FEDCBA9876543210FEDCBA9")};

  CurvePoint qa = scalar_mul(da, cp.g, cp);
  CurvePoint qb = scalar_mul(db, cp.g, cp);
  CurvePoint s1 = scalar_mul(da, qb, cp);
  CurvePoint s2 = scalar_mul(db, qa, cp);

  CHECK(s1 == s2);
  CHECK(s1 == pt160("0x3ac2134e922b89ca7bb0dbb96e7c48a16539feed",
                    "0xbcc23fee4604fabfc919c37585b8d876d948b8b9"));
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

TEST_CASE("point encoding round-trips and stays fixed-width") {
  for (const CurveParams* cpp : {&paper160(), &tiny97()}) {
    const CurveParams& cp = *cpp;
    Rng rng(42);
    for (int i = 0; i < 5; ++i) {
      CurvePoint p = scalar_mul(rng.scalar(cp), cp.g, cp);
      Bytes enc = encode_point(p, cp);
      REQUIRE(enc.size() == CurveParams::kPointBytes);
      auto back = decode_point(enc, cp);
      REQUIRE(back.has_value());
      CHECK(*back == p);
    }
  }
}

TEST_CASE("point decoding rejects structural garbage") {
  const CurveParams& cp = paper160();
  Bytes enc = encode_point(cp.g, cp);

  Bytes off = enc;
  off[39] ^= 0x01;  // tweak y: almost surely off the curve
  CHECK(!decode_point(off, cp).has_value());

  Bytes short_buf(enc.begin(), enc.end() - 1);
  CHECK(!decode_point(short_buf, cp).has_value());
  Bytes long_buf = enc;
  long_buf.push_back(0);
  CHECK(!decode_point(long_buf, cp).has_value());

  CHECK_THROWS_AS(encode_point(CurvePoint::infinity(), cp),
                  std::invalid_argument);
}

TEST_CASE("a point from one profile does not decode under the other") {
  // tiny97 coordinates are tiny integers; as 160-bit coordinates they sit
  // nowhere near the paper160 curve.
  Bytes enc = encode_point(tiny97().g, tiny97());
  CHECK(!decode_point(enc, paper160()).has_value());
}

TEST_CASE("scalar encoding round-trips and enforces the range") {
  const CurveParams& cp = paper160();
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    Scalar s = rng.scalar(cp);
    Bytes enc = encode_scalar(s);
    REQUIRE(enc.size() == kScalarBytes);
    auto back = decode_scalar(enc, cp);
    REQUIRE(back.has_value());
    CHECK(*back == s);
  }

  Bytes zero(kScalarBytes, 0);
  CHECK(!decode_scalar(zero, cp).has_value());
  CHECK(!decode_scalar(encode_scalar(Scalar{cp.n}), cp).has_value());
  Bytes short_buf(kScalarBytes - 1, 1);
  CHECK(!decode_scalar(short_buf, cp).has_value());
}

// ---------------------------------------------------------------------------
// MultiplesEnumerator
// ---------------------------------------------------------------------------

TEST_CASE("enumerator agrees with scalar_mul over a long prefix") {
  const CurveParams& cp = paper160();
  MultiplesEnumerator en(cp.g, cp, 64);
  for (uint64_t k = 1; k <= 200; ++k) {
    auto [idx, p] = en.next();
    REQUIRE(idx == k);
    CHECK(p == scalar_mul(sc(k), cp.g, cp));
  }
}

TEST_CASE("enumerator walks through the identity and wraps") {
  const CurveParams& cp = tiny97();
  MultiplesEnumerator en(cp.g, cp, 16);
  for (uint64_t k = 1; k <= 110; ++k) {
    auto [idx, p] = en.next();
    REQUIRE(idx == k);
    if (k % 50 == 0) {
      CHECK(p.identity);
    } else {
      CHECK(p == scalar_mul(sc(k % 50), cp.g, cp));
    }
  }
}

TEST_CASE("enumerator works from an arbitrary base point") {
  const CurveParams& cp = tiny97();
  CurvePoint base = scalar_mul(sc(7), cp.g, cp);
  MultiplesEnumerator en(base, cp, 8);
  for (uint64_t k = 1; k <= 60; ++k) {
    auto [idx, p] = en.next();
    REQUIRE(idx == k);
    uint64_t eff = (7 * k) % 50;
    if (eff == 0) {
      CHECK(p.identity);
    } else {
      CHECK(p == scalar_mul(sc(eff), cp.g, cp));
    }
  }
}

TEST_CASE("enumerator rejects a bad base") {
  const CurveParams& cp = tiny97();
  CHECK_THROWS_AS(MultiplesEnumerator(pt(1, 1), cp), std::invalid_argument);
  CHECK_THROWS_AS(MultiplesEnumerator(CurvePoint::infinity(), cp),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Profile lookup
// ---------------------------------------------------------------------------

TEST_CASE("profiles resolve by name and nothing else") {
  CHECK(profile("paper160").id == "paper160");
  CHECK(profile("tiny97").id == "tiny97");
  CHECK(&profile("paper160") == &paper160());
  CHECK(&profile("tiny97") == &tiny97());
  CHECK_THROWS(profile("p-256"));
  CHECK_THROWS(profile(""));
}

TEST_CASE("both profiles carry internally consistent parameters") {
  for (const CurveParams* cpp : {&paper160(), &tiny97()}) {
    const CurveParams& cp = *cpp;
    REQUIRE(on_curve(cp.g, cp));
    // nG = identity, via (n-1)G + G.
    CurvePoint last = scalar_mul(Scalar{cp.n - 1}, cp.g, cp);
    CHECK(point_add(last, cp.g, cp).identity);
  }
}
