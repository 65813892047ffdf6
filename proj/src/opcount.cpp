#include "ugw/opcount.hpp"

namespace ugw::ops {

namespace {
thread_local Counters g_counters;
thread_local int g_suppress_depth = 0;
}  // namespace

void reset() { g_counters = Counters{}; }

Counters snapshot() { return g_counters; }

void tick_hash() {
  if (g_suppress_depth == 0) ++g_counters.hash;
}

void tick_point_mul() { ++g_counters.point_mul; }

void tick_point_add() { ++g_counters.point_add; }

void tick_sym() { ++g_counters.sym; }

SuppressHashCount::SuppressHashCount() { ++g_suppress_depth; }

SuppressHashCount::~SuppressHashCount() { --g_suppress_depth; }

bool hash_suppressed() { return g_suppress_depth > 0; }

}  // namespace ugw::ops
