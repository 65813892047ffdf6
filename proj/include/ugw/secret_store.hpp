#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ugw/digest.hpp"
#include "ugw/protocol.hpp"

namespace ugw {

// Everything the gateway must remember about one user to verify a login:
// the long-term secrets minted at setup, keyed by the card pseudonym (which
// is the only identity-shaped field a login request carries in the clear).
struct SecretEntry {
  Digest160 mid;          // card pseudonym, lookup key
  Digest160 uid;          // real identity behind the pseudonym
  GatewaySecrets secrets;  // gwr_j, s_i, k_gw

  bool operator==(const SecretEntry&) const = default;
};

class SecretStore {
 public:
  SecretStore() = default;
  SecretStore(const SecretStore& other) : entries_(other.snapshot()) {}
  SecretStore& operator=(const SecretStore& other) {
    if (this != &other) {
      auto snap = other.snapshot();
      std::lock_guard lock(mu_);
      entries_ = std::move(snap);
    }
    return *this;
  }

  // False if the mid is already present.
  bool insert(const SecretEntry& entry);

  std::optional<SecretEntry> find(const Digest160& mid) const;
  size_t size() const;
  std::vector<SecretEntry> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::vector<SecretEntry> entries_;
};

// On-disk form, written 0600 and atomically (temp + rename). With a
// passphrase the entry block is encrypted and carries an integrity tag;
// load with the wrong passphrase (or none) is refused, not garbled.
void persist_secret_store(const SecretStore& store, const std::string& path,
                          const CurveParams& cp,
                          const std::string& passphrase = "");
SecretStore load_secret_store(const std::string& path, const CurveParams& cp,
                              const std::string& passphrase = "");

}  // namespace ugw
