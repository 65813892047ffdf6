// ugw-gateway: the gateway daemon. Loads the registry and per-user secret
// store, binds the registration/login/echo topics on an MQTT broker, and
// serves until SIGINT/SIGTERM, persisting state on the way out.
//
// --loopback runs a self-test instead: the service is started on an
// in-process bus and a scripted enroll + login + echo is driven against it.
// A loopback transport can't receive external traffic, so this mode exists
// to prove the binary's whole stack (service, agent, wire, protocol)
// without a broker. Exit 0 when the round trip agrees on a key.
//
// The secret-store passphrase comes from UGW_GATEWAY_SECRET; configuration
// may also be given as key=value lines via --config (explicit flags win).

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "cli_util.hpp"
#include "ugw/gateway.hpp"
#include "ugw/useragent.hpp"

namespace {

using namespace ugw;

// key=value lines, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw std::runtime_error("cannot read config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

int run_selftest(const ServiceConfig& sc) {
  GatewayService svc(sc, FreshnessPolicy{.delta_t = sc.delta_t});
  LoopbackBus bus;
  svc.bind(bus);

  char tmpl[] = "/tmp/ugw-selftest-XXXXXX";
  const char* dir = ::mkdtemp(tmpl);
  if (!dir) {
    std::fprintf(stderr, "ugw-gateway: self-test: mkdtemp failed\n");
    return 1;
  }
  std::string base = dir;

  AgentConfig ac;
  ac.gateway_id = sc.gateway_id;
  ac.card_path = base + "/card.bin";
  ac.device_path = base + "/device.bin";
  ac.profile_id = sc.profile_id;
  ac.delta_t = sc.delta_t;
  UserAgent agent(ac, bus, Rng::from_system_entropy());

  int rc = 1;
  try {
    std::string user = "selftest-" + std::to_string(::getpid());
    Password pw{"selftest-password"};
    agent.enroll(user, pw);
    LoginResult res = agent.login(user, pw);
    auto rec = svc.session_for(res.mid);
    bool keys_match = rec && rec->s_k.s_k == res.session.s_k;
    Bytes reply = agent.echo(res, to_bytes("self-test"));
    bool echo_ok = reply == to_bytes("self-test");
    if (keys_match && echo_ok) {
      std::printf("self-test ok: session %s, echo round trip verified\n",
                  to_hex(res.session.s_k.bytes()).c_str());
      rc = 0;
    } else {
      std::fprintf(stderr,
                   "ugw-gateway: self-test FAILED (keys_match=%d echo_ok=%d)\n",
                   keys_match, echo_ok);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ugw-gateway: self-test FAILED: %s\n", e.what());
  }
  std::error_code ec;
  std::filesystem::remove_all(base, ec);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gateway daemon for the two-factor authentication scheme"};

  std::string config_path;
  std::string gateway_id = "gw0";
  std::string broker = "127.0.0.1:1883";
  std::string profile_id = "paper160";
  std::string registry_path = cli::state_path("gateway-registry.bin");
  std::string secret_store_path = cli::state_path("gateway-secrets.bin");
  uint32_t delta_t = 5;
  uint64_t seed = 0;
  bool loopback = false;

  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--gateway-id", gateway_id, "gateway identifier in topics")
      ->capture_default_str();
  app.add_option("--broker", broker, "MQTT broker, host[:port]")
      ->capture_default_str();
  app.add_option("--profile", profile_id, "curve profile (paper160, tiny97)")
      ->capture_default_str();
  app.add_option("--delta-t", delta_t, "freshness window, seconds")
      ->capture_default_str();
  app.add_option("--registry", registry_path, "registry file")
      ->capture_default_str();
  app.add_option("--secret-store", secret_store_path, "secret-store file")
      ->capture_default_str();
  app.add_option("--seed", seed, "rng seed (0 = system entropy)")
      ->capture_default_str();
  app.add_flag("--loopback", loopback,
               "run the in-process self-test instead of serving");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      auto kv = parse_config_file(config_path);
      auto take = [&](const char* flag, const char* key, auto& into) {
        auto it = kv.find(key);
        if (it == kv.end() || app.count(flag) > 0) return;
        if constexpr (std::is_same_v<std::decay_t<decltype(into)>,
                                     std::string>) {
          into = it->second;
        } else {
          into = static_cast<std::decay_t<decltype(into)>>(
              std::stoull(it->second));
        }
      };
      take("--gateway-id", "gateway-id", gateway_id);
      take("--broker", "broker", broker);
      take("--profile", "profile", profile_id);
      take("--delta-t", "delta-t", delta_t);
      take("--registry", "registry", registry_path);
      take("--secret-store", "secret-store", secret_store_path);
      take("--seed", "seed", seed);
    }

    auto [host, port] = cli::parse_broker(broker, 1883);
    ServiceConfig sc;
    sc.gateway_id = gateway_id;
    sc.broker_host = host;
    sc.broker_port = port;
    sc.profile_id = profile_id;
    sc.delta_t = delta_t;
    sc.registry_path = registry_path;
    sc.secret_store_path = secret_store_path;
    sc.rng_seed = seed;
    if (const char* pass = std::getenv("UGW_GATEWAY_SECRET"))
      sc.secret_passphrase = pass;

    if (delta_t == 0) {
      std::fprintf(stderr, "ugw-gateway: --delta-t must be positive\n");
      return 1;
    }
    cli::ensure_parent_dir(registry_path);
    cli::ensure_parent_dir(secret_store_path);

    if (loopback) return run_selftest(sc);
    return serve(sc);
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "ugw-gateway: %s\n", cli::describe_error(e).c_str());
    return cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ugw-gateway: %s\n", e.what());
    return 1;
  }
}
