#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "ugw/bytes.hpp"

namespace ugw {

// 160-bit digest value. Every derived quantity in the protocol (h_i, x_i,
// T, L_i, pid, s_k, sq, ...) is one of these, and the XOR-combination
// algebra (o_i = T xor h_i, pid = T xor Hash(...)) lives on this type.
struct Digest160 {
  static constexpr size_t kSize = 20;
  std::array<uint8_t, kSize> v{};

  bool operator==(const Digest160&) const = default;

  Digest160 operator^(const Digest160& o) const {
    Digest160 r;
    for (size_t i = 0; i < kSize; ++i) r.v[i] = v[i] ^ o.v[i];
    return r;
  }

  std::span<const uint8_t> bytes() const { return {v.data(), v.size()}; }
  std::string hex() const { return to_hex(v); }

  static Digest160 from(std::span<const uint8_t> raw);  // requires 20 bytes
};

// Top-level protocol hash. Counted by the cost analyzer unless invoked from
// inside a keyed primitive (see ops::SuppressHashCount).
Digest160 hash160(std::span<const uint8_t> data);

// Convenience for multi-part input: hash160(a || b || ...) without an
// explicit concat at every call site.
Digest160 hash160_cat(std::initializer_list<std::span<const uint8_t>> parts);

}  // namespace ugw
