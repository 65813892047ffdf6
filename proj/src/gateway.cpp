#include "ugw/gateway.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "ugw/errors.hpp"
#include "ugw/mqtt.hpp"
#include "ugw/wire.hpp"

namespace ugw {

GatewayService::GatewayService(const ServiceConfig& config,
                               FreshnessPolicy policy)
    : config_(config),
      cp_(profile(config.profile_id)),
      policy_(std::move(policy)),
      rng_(config.rng_seed != 0 ? Rng(config.rng_seed)
                                : Rng::from_system_entropy()) {
  namespace fs = std::filesystem;
  // Missing files mean a fresh gateway; damaged files mean refusal to
  // start. Silently starting empty over a corrupt registry would unregister
  // every user.
  if (!config_.registry_path.empty() && fs::exists(config_.registry_path))
    registry_ = load_registry(config_.registry_path);
  if (!config_.secret_store_path.empty() &&
      fs::exists(config_.secret_store_path))
    store_ = load_secret_store(config_.secret_store_path, cp_,
                               config_.secret_passphrase);
}

void GatewayService::persist() const {
  if (!config_.registry_path.empty())
    persist_registry(registry_, config_.registry_path);
  if (!config_.secret_store_path.empty())
    persist_secret_store(store_, config_.secret_store_path, cp_,
                         config_.secret_passphrase);
}

ServiceCounters GatewayService::counters() const {
  std::lock_guard lock(counter_mu_);
  return counters_;
}

size_t GatewayService::registered_users() const { return registry_.size(); }

size_t GatewayService::active_sessions() const {
  std::lock_guard lock(session_mu_);
  return sessions_.size();
}

std::optional<SessionRecord> GatewayService::session_for(
    const Digest160& mid) const {
  std::lock_guard lock(session_mu_);
  auto it = sessions_.find(mid.v);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

Bytes GatewayService::login_failure(uint64_t ServiceCounters::* counter) {
  {
    std::lock_guard lock(counter_mu_);
    counters_.*counter += 1;
  }
  return login_failure_frame();
}

Bytes GatewayService::handle_register(const Bytes& body) {
  auto frame = decode_register_frame(body);
  if (!frame) {
    std::lock_guard lock(counter_mu_);
    counters_.malformed += 1;
    return register_failure_frame(kRegFailMalformed);
  }
  auto d_u = decode_point(frame->d_u, cp_);
  if (!d_u) {
    std::lock_guard lock(counter_mu_);
    counters_.malformed += 1;
    return register_failure_frame(kRegFailMalformed);
  }

  Rng local = [&] {
    std::lock_guard lock(rng_mu_);
    return Rng(get_be64(rng_.bytes(8)));
  }();

  auto [gw, s_i] = setup_gateway_respond(*d_u, cp_, local);
  IssuedCard issued;
  try {
    issued = register_gateway_issue_card(frame->request, gw, registry_, cp_,
                                         policy_.now());
  } catch (const ProtocolError& e) {
    std::lock_guard lock(counter_mu_);
    counters_.unknown_identity += 1;
    return register_failure_frame(e.kind() == ErrKind::kIdentityNotAvailable
                                      ? kRegFailIdentityTaken
                                      : kRegFailMalformed);
  }
  if (!store_.insert(SecretEntry{issued.mid, frame->request.uid, gw})) {
    // A mid collision would need two distinct (uid, k_gw) pairs to encrypt
    // to the same pseudonym; refuse rather than overwrite if it ever does.
    std::lock_guard lock(counter_mu_);
    counters_.malformed += 1;
    return register_failure_frame(kRegFailMalformed);
  }
  persist();
  {
    std::lock_guard lock(counter_mu_);
    counters_.registrations += 1;
  }

  RegisterReply reply;
  Bytes s_i_raw = encode_point(s_i, cp_);
  std::copy(s_i_raw.begin(), s_i_raw.end(), reply.s_i.begin());
  reply.issued = issued;
  return encode_register_reply(reply);
}

Bytes GatewayService::handle_login(const Bytes& body) {
  auto req = decode_login_request(body);
  if (!req) return login_failure(&ServiceCounters::malformed);

  auto entry = store_.find(req->mid);
  if (!entry) return login_failure(&ServiceCounters::unknown_identity);

  // Replay precheck. The stamp list only ever holds values accepted within
  // the freshness window, so pruning at 2·delta_t keeps it tiny.
  uint32_t now = policy_.now();
  auto prune = [&](std::vector<uint32_t>& stamps) {
    std::erase_if(stamps, [&](uint32_t s) {
      return now >= s && now - s > 2 * policy_.delta_t;
    });
  };
  {
    std::lock_guard lock(session_mu_);
    auto it = sessions_.find(req->mid.v);
    if (it != sessions_.end()) {
      prune(it->second.recent_t_ki);
      for (uint32_t s : it->second.recent_t_ki)
        if (s == req->t_ki) return login_failure(&ServiceCounters::replays);
    }
  }

  Rng local = [&] {
    std::lock_guard lock(rng_mu_);
    return Rng(get_be64(rng_.bytes(8)));
  }();

  AuthResponse resp;
  SessionKey key;
  try {
    std::tie(resp, key) =
        gateway_process_login(*req, entry->secrets, registry_, policy_, cp_,
                              local);
  } catch (const ProtocolError& e) {
    switch (e.kind()) {
      case ErrKind::kFreshnessViolation:
        return login_failure(&ServiceCounters::freshness);
      case ErrKind::kUnknownIdentity:
        return login_failure(&ServiceCounters::unknown_identity);
      case ErrKind::kMalformedRequest:
        return login_failure(&ServiceCounters::malformed);
      default:
        return login_failure(&ServiceCounters::auth_failures);
    }
  }

  // Commit the stamp. A concurrent duplicate of the same frame races us
  // here; exactly one wins.
  {
    std::lock_guard lock(session_mu_);
    auto& rec = sessions_[req->mid.v];
    prune(rec.recent_t_ki);
    for (uint32_t s : rec.recent_t_ki)
      if (s == req->t_ki) return login_failure(&ServiceCounters::replays);
    rec.uid = entry->uid;
    rec.s_k = key;
    rec.t_established = resp.t_k_new;
    rec.recent_t_ki.push_back(req->t_ki);
  }
  {
    std::lock_guard lock(counter_mu_);
    counters_.logins += 1;
  }
  return encode_auth_response(resp);
}

Bytes GatewayService::handle_echo(const Bytes& body) {
  auto req = decode_echo_request(body);
  if (!req) return login_failure(&ServiceCounters::malformed);

  std::optional<SessionRecord> rec = session_for(req->mid);
  if (!rec) return login_failure(&ServiceCounters::unknown_identity);

  SymmetricKey k_echo = derive_echo_key(rec->s_k);
  auto plaintext = open_echo_request(*req, k_echo);
  if (!plaintext) return login_failure(&ServiceCounters::auth_failures);

  {
    std::lock_guard lock(counter_mu_);
    counters_.echoes += 1;
  }
  return encode_echo_reply(k_echo, *plaintext);
}

void GatewayService::bind(Transport& transport) {
  auto attach = [this, &transport](const std::string& prefix,
                                   Bytes (GatewayService::*handler)(
                                       const Bytes&)) {
    transport.subscribe(
        prefix + "/req",
        [this, &transport, prefix, handler](const std::string&,
                                            const Bytes& payload) {
          auto env = envelope_open(payload);
          if (!env) {
            std::lock_guard lock(counter_mu_);
            counters_.malformed += 1;
            return;  // no nonce, nowhere to answer
          }
          Bytes reply = (this->*handler)(env->body);
          transport.publish(prefix + "/resp/" + to_hex(env->nonce), reply);
        });
  };
  attach(topic_prefix_reg(config_.gateway_id), &GatewayService::handle_register);
  attach(topic_prefix_auth(config_.gateway_id), &GatewayService::handle_login);
  attach(topic_prefix_echo(config_.gateway_id), &GatewayService::handle_echo);
}

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int serve(const ServiceConfig& config) {
  std::unique_ptr<GatewayService> svc;
  try {
    svc = std::make_unique<GatewayService>(
        config, FreshnessPolicy{.delta_t = config.delta_t});
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ugw-gateway: refusing to start: %s\n", e.what());
    return 1;
  }

  MqttConfig mc;
  mc.host = config.broker_host;
  mc.port = config.broker_port;
  mc.client_id = "ugw-gateway-" + config.gateway_id;
  MqttTransport transport(mc);
  try {
    transport.connect();
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "ugw-gateway: %s\n", e.what());
    return 1;
  }
  svc->bind(transport);
  std::fprintf(stderr, "ugw-gateway: serving '%s' via %s:%u (profile %s)\n",
               config.gateway_id.c_str(), config.broker_host.c_str(),
               config.broker_port, config.profile_id.c_str());

  struct sigaction sa{};
  sa.sa_handler = on_signal;
  ::sigaction(SIGINT, &sa, nullptr);
  ::sigaction(SIGTERM, &sa, nullptr);
  while (!g_stop)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));

  try {
    svc->persist();
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "ugw-gateway: persist on shutdown failed: %s\n",
                 e.what());
    return 1;
  }
  ServiceCounters c = svc->counters();
  std::fprintf(stderr,
               "ugw-gateway: shut down (registrations=%llu logins=%llu "
               "echoes=%llu malformed=%llu replays=%llu)\n",
               static_cast<unsigned long long>(c.registrations),
               static_cast<unsigned long long>(c.logins),
               static_cast<unsigned long long>(c.echoes),
               static_cast<unsigned long long>(c.malformed),
               static_cast<unsigned long long>(c.replays));
  return 0;
}

}  // namespace ugw
