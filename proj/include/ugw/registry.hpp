#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "ugw/digest.hpp"

namespace ugw {

// One registered user. Deliberately contains no key material: everything
// secret lives in the gateway's secret store, everything ephemeral in the
// session table. There is no D_u here by design — the gateway recovers it
// from each login request and forgets it.
struct UserRecord {
  Digest160 uid;
  uint64_t registered_at = 0;  // epoch seconds
  uint8_t status = 1;          // 1 = active

  bool operator==(const UserRecord&) const = default;
};

// Registered-identity table. Insertion is serialized so concurrent
// registrations of the same uid resolve to exactly one winner.
class Registry {
 public:
  Registry() = default;
  Registry(const Registry& other) : records_(other.snapshot()) {}
  Registry& operator=(const Registry& other) {
    if (this != &other) {
      auto snap = other.snapshot();
      std::lock_guard lock(mu_);
      records_ = std::move(snap);
    }
    return *this;
  }

  // False if the uid is already present (the duplicate loses).
  bool try_insert(const UserRecord& rec);

  bool is_active(const Digest160& uid) const;
  size_t size() const;
  std::vector<UserRecord> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::vector<UserRecord> records_;
};

// Length-checked, checksummed on-disk form. Writes go to a temp file in the
// same directory followed by rename, so a crash never leaves a half-written
// registry. Load refuses anything structurally damaged.
void persist_registry(const Registry& reg, const std::string& path);
Registry load_registry(const std::string& path);

}  // namespace ugw
