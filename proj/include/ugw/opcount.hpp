#pragma once

#include <cstdint>

namespace ugw::ops {

// Per-thread primitive-operation counters. The cost analyzer resets them,
// runs a protocol phase, and reads them back. Counting is thread-local so
// concurrent gateway traffic in other threads never bleeds into a trace.
struct Counters {
  uint64_t hash = 0;       // top-level 160-bit hash invocations
  uint64_t point_mul = 0;  // scalar multiplications
  uint64_t point_add = 0;  // standalone point additions
  uint64_t sym = 0;        // symmetric encrypt/decrypt calls
};

void reset();
Counters snapshot();

void tick_hash();
void tick_point_mul();
void tick_point_add();
void tick_sym();

// The keyed-hash primitives (KDF, keystream cipher, hash-to-scalar) call the
// 160-bit hash internally. Those inner calls are implementation detail, not
// protocol steps, so they are excluded from the hash counter while a guard
// is alive. Guards nest.
class SuppressHashCount {
 public:
  SuppressHashCount();
  ~SuppressHashCount();
  SuppressHashCount(const SuppressHashCount&) = delete;
  SuppressHashCount& operator=(const SuppressHashCount&) = delete;
};

bool hash_suppressed();

}  // namespace ugw::ops
