#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ugw/protocol.hpp"
#include "ugw/registry.hpp"
#include "ugw/secret_store.hpp"
#include "ugw/transport.hpp"

namespace ugw {

struct ServiceConfig {
  std::string gateway_id = "gw0";
  std::string broker_host = "127.0.0.1";
  uint16_t broker_port = 1883;
  std::string profile_id = "paper160";
  uint32_t delta_t = 5;               // freshness window, seconds
  std::string registry_path;          // empty = in-memory only
  std::string secret_store_path;      // empty = in-memory only
  std::string secret_passphrase;      // from UGW_GATEWAY_SECRET
  uint64_t rng_seed = 0;              // 0 = system entropy
};

// Topic layout. request_reply() appends "/req" and "/resp/<nonce-hex>".
inline std::string topic_prefix_reg(const std::string& gw_id) {
  return "ugw/" + gw_id + "/reg";
}
inline std::string topic_prefix_auth(const std::string& gw_id) {
  return "ugw/" + gw_id + "/auth";
}
inline std::string topic_prefix_echo(const std::string& gw_id) {
  return "ugw/" + gw_id + "/echo";
}

// Established session, looked up by card pseudonym for echo frames. The
// stamp list is the replay cache: t_ki values accepted within the last
// 2·delta_t seconds (older ones can't pass the freshness check anyway).
struct SessionRecord {
  Digest160 uid;
  SessionKey s_k;
  uint32_t t_established = 0;
  std::vector<uint32_t> recent_t_ki;
};

// Rejections by kind, plus the success tallies. Failures all look the same
// on the wire; this is the only place causes are visible.
struct ServiceCounters {
  uint64_t malformed = 0;
  uint64_t freshness = 0;
  uint64_t replays = 0;
  uint64_t unknown_identity = 0;
  uint64_t auth_failures = 0;
  uint64_t registrations = 0;
  uint64_t logins = 0;
  uint64_t echoes = 0;
};

// The gateway: registry + per-user secret store + live session table,
// exposed as three frame handlers. Transport-agnostic; bind() attaches the
// handlers to topics. Distinct users may log in concurrently — only the
// session/replay table is serialized, not the curve arithmetic.
class GatewayService {
 public:
  GatewayService(const ServiceConfig& config, FreshnessPolicy policy);

  // Frame in, frame out. Never throws: all failures map to the uniform
  // failure frames defined in the wire layer.
  Bytes handle_register(const Bytes& body);
  Bytes handle_login(const Bytes& body);
  Bytes handle_echo(const Bytes& body);

  // Subscribes the three request topics on `transport`, unwrapping the
  // correlation envelope and publishing each reply.
  void bind(Transport& transport);

  // Writes registry + secret store to their configured paths (no-op for
  // in-memory configurations).
  void persist() const;

  ServiceCounters counters() const;
  size_t registered_users() const;
  size_t active_sessions() const;
  std::optional<SessionRecord> session_for(const Digest160& mid) const;

 private:
  Bytes login_failure(uint64_t ServiceCounters::* counter);

  ServiceConfig config_;
  const CurveParams& cp_;
  FreshnessPolicy policy_;
  Rng rng_;
  std::mutex rng_mu_;

  Registry registry_;
  SecretStore store_;

  mutable std::mutex session_mu_;
  std::map<std::array<uint8_t, Digest160::kSize>, SessionRecord> sessions_;

  mutable std::mutex counter_mu_;
  ServiceCounters counters_;
};

// Foreground daemon: connect to the broker, serve until SIGINT/SIGTERM,
// persist state, return an exit code.
int serve(const ServiceConfig& config);

}  // namespace ugw
