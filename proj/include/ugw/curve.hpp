#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "ugw/bytes.hpp"

namespace ugw {

// Fixed-width unsigned big integer. 512 bits holds the product of two
// 161-bit field elements with room to spare, with no heap allocation.
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<
    512, 512, boost::multiprecision::unsigned_magnitude,
    boost::multiprecision::unchecked, void>>;

// Affine point on a short Weierstrass curve y^2 = x^3 + ax + b (mod p).
struct CurvePoint {
  BigInt x{};
  BigInt y{};
  bool identity = false;

  bool operator==(const CurvePoint&) const = default;

  static CurvePoint infinity() { return {0, 0, true}; }
};

// Scalar multiplier. Valid protocol scalars lie in [1, n-1] where n is the
// order of the pinned generator; range is enforced where scalars enter the
// group operations, not at construction.
struct Scalar {
  BigInt v{};
  bool operator==(const Scalar&) const = default;
};

struct CurveParams {
  std::string id;  // profile name: "paper160" or "tiny97"
  BigInt p;        // field prime
  BigInt a, b;     // curve coefficients
  CurvePoint g;    // pinned generator
  BigInt n;        // order of g

  // Wire widths are structural: both profiles serialize coordinates to 20
  // bytes so message sizes never depend on the profile.
  static constexpr size_t kCoordBytes = 20;
  static constexpr size_t kPointBytes = 2 * kCoordBytes;
};

// Named parameter profiles (see src/profiles.cpp for the pinned constants).
const CurveParams& paper160();
const CurveParams& tiny97();
const CurveParams& profile(std::string_view id);  // throws on unknown id

bool on_curve(const CurvePoint& pt, const CurveParams& cp);

// Chord-and-tangent addition on affine coordinates. Handles identity,
// doubling and inverse-pair inputs; rejects points not on the curve.
CurvePoint point_add(const CurvePoint& lhs, const CurvePoint& rhs,
                     const CurveParams& cp);

CurvePoint point_negate(const CurvePoint& pt, const CurveParams& cp);

// k * P via a Montgomery ladder over Jacobian coordinates (one field
// inversion total). Rejects k outside [1, n-1] and P off the curve.
CurvePoint scalar_mul(const Scalar& k, const CurvePoint& pt,
                      const CurveParams& cp);

// Fixed-width big-endian coordinate pair, x || y, 40 bytes. The identity
// has no encoding; encode throws on it, decode rejects anything off curve.
Bytes encode_point(const CurvePoint& pt, const CurveParams& cp);
std::optional<CurvePoint> decode_point(std::span<const uint8_t> raw,
                                       const CurveParams& cp);

// Fixed-width big-endian scalar encode/decode for local state files.
constexpr size_t kScalarBytes = 24;
Bytes encode_scalar(const Scalar& s);
std::optional<Scalar> decode_scalar(std::span<const uint8_t> raw,
                                    const CurveParams& cp);

// Streams the affine forms of P, 2P, 3P, ... far cheaper than one
// scalar_mul per index: the walk accumulates in Jacobian coordinates and
// field inversions are batched (Montgomery's trick), so the amortized cost
// per point is a handful of field multiplications. Built for brute-force
// style scans that need millions of sequential multiples; does not touch
// the operation counters. Indices past the point's order wrap through the
// identity (reported with identity = true) exactly as the group does.
class MultiplesEnumerator {
 public:
  MultiplesEnumerator(const CurvePoint& p, const CurveParams& cp,
                      size_t batch = 1024);
  ~MultiplesEnumerator();
  MultiplesEnumerator(const MultiplesEnumerator&) = delete;
  MultiplesEnumerator& operator=(const MultiplesEnumerator&) = delete;

  // First call yields (1, P), then (2, 2P), (3, 3P), ...
  std::pair<uint64_t, CurvePoint> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ugw
