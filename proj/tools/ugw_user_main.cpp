// ugw-user: command-line user agent. Enrolls an identity (writing the
// smart-card and device-state files), performs two-factor logins, updates
// the password locally, and round-trips an encrypted echo over an
// established session.
//
// Exit codes: 0 success, 2 identity not available, 3 transport failure,
// 4 local two-factor failure (nothing sent), 5 gateway-side rejection,
// 1 anything else.
//
// stdout carries only machine-consumable lines (key fingerprints, echo
// replies); everything human goes to stderr. `login` prints the session-key
// fingerprint; with --loopback it prints the in-process gateway's
// fingerprint on a second line so tests can compare the two sides.

#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "cli_util.hpp"
#include "ugw/gateway.hpp"
#include "ugw/mqtt.hpp"
#include "ugw/useragent.hpp"
#include "ugw/wire.hpp"

namespace {

using namespace ugw;

constexpr std::string_view kSessionMagic = "UGWSN";
constexpr size_t kSessionFileBytes = 5 + 1 + 20 + 4 + 20;

Bytes encode_session_file(const LoginResult& res, const CurveParams& cp) {
  Bytes out;
  append(out, to_bytes(kSessionMagic));
  out.push_back(static_cast<uint8_t>(profile_digit(cp)));
  append(out, res.session.s_k.bytes());
  put_be32(out, res.session.established_at);
  append(out, res.mid.bytes());
  return out;
}

LoginResult decode_session_file(const Bytes& raw, const CurveParams& cp) {
  if (raw.size() != kSessionFileBytes ||
      !std::equal(kSessionMagic.begin(), kSessionMagic.end(), raw.begin()) ||
      raw[5] != static_cast<uint8_t>(profile_digit(cp)))
    throw ProtocolError(ErrKind::kStateError,
                        "session file is corrupt or from another profile; "
                        "log in again");
  LoginResult res;
  res.session.s_k = Digest160::from({raw.data() + 6, 20});
  res.session.established_at = get_be32({raw.data() + 26, 4});
  res.mid = Digest160::from({raw.data() + 30, 20});
  return res;
}

std::string fingerprint(const SessionKey& key) { return to_hex(key.s_k.bytes()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "user agent: enroll, two-factor login, password update, encrypted "
      "echo"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string gateway_id = "gw0";
  std::string broker = "127.0.0.1:1883";
  std::string profile_id = "paper160";
  std::string card_path = cli::state_path("card.bin");
  std::string device_path = cli::state_path("device.bin");
  std::string session_path = cli::state_path("session.bin");
  std::string registry_path = cli::state_path("loopback-registry.bin");
  std::string secret_store_path = cli::state_path("loopback-secrets.bin");
  uint32_t delta_t = 5;
  uint32_t timeout_ms = 3000;
  bool loopback = false;

  app.add_option("--gateway-id", gateway_id, "gateway identifier in topics")
      ->capture_default_str();
  app.add_option("--broker", broker, "MQTT broker, host[:port]")
      ->capture_default_str();
  app.add_option("--profile", profile_id, "curve profile (paper160, tiny97)")
      ->capture_default_str();
  app.add_option("--card", card_path, "smart-card file")
      ->capture_default_str();
  app.add_option("--device", device_path, "device-state file")
      ->capture_default_str();
  app.add_option("--session", session_path, "session token file")
      ->capture_default_str();
  app.add_option("--delta-t", delta_t, "freshness window, seconds")
      ->capture_default_str();
  app.add_option("--timeout", timeout_ms, "request timeout, ms")
      ->capture_default_str();
  app.add_flag("--loopback", loopback,
               "run against an in-process gateway instead of a broker "
               "(state under --registry/--secret-store)");
  app.add_option("--registry", registry_path,
                 "loopback gateway registry file")
      ->capture_default_str();
  app.add_option("--secret-store", secret_store_path,
                 "loopback gateway secret-store file")
      ->capture_default_str();

  std::string name;
  std::string echo_message;

  CLI::App* cmd_register = app.add_subcommand(
      "register", "enroll NAME and write the card/device files");
  cmd_register->add_option("name", name, "identity to enroll")->required();

  CLI::App* cmd_login = app.add_subcommand(
      "login", "two-factor login; prints the session-key fingerprint");
  cmd_login->add_option("name", name, "identity to log in as")->required();
  cmd_login->add_option("--message", echo_message,
                        "after login, echo this text through the session");

  CLI::App* cmd_update = app.add_subcommand(
      "update-password", "rewrite the card under a new password (local only)");
  cmd_update->add_option("name", name, "identity on the card")->required();

  CLI::App* cmd_echo = app.add_subcommand(
      "echo", "encrypted round trip over the session from the last login");
  cmd_echo->add_option("--message", echo_message, "text to echo")
      ->default_val("ping");

  CLI11_PARSE(app, argc, argv);

  try {
    const CurveParams& cp = profile(profile_id);

    // Transport: a real broker, or an in-process gateway on a loopback bus.
    LoopbackBus bus;
    std::unique_ptr<MqttTransport> mqtt;
    std::unique_ptr<GatewayService> local_gw;
    Transport* transport = nullptr;
    if (loopback) {
      cli::ensure_parent_dir(registry_path);
      ServiceConfig sc;
      sc.gateway_id = gateway_id;
      sc.profile_id = profile_id;
      sc.delta_t = delta_t;
      sc.registry_path = registry_path;
      sc.secret_store_path = secret_store_path;
      if (const char* pass = std::getenv("UGW_GATEWAY_SECRET"))
        sc.secret_passphrase = pass;
      local_gw = std::make_unique<GatewayService>(
          sc, FreshnessPolicy{.delta_t = delta_t});
      local_gw->bind(bus);
      transport = &bus;
    } else {
      auto [host, port] = cli::parse_broker(broker, 1883);
      MqttConfig mc;
      mc.host = host;
      mc.port = port;
      mc.client_id = "ugw-user-" + std::to_string(::getpid());
      mc.io_timeout = std::chrono::milliseconds(timeout_ms);
      mqtt = std::make_unique<MqttTransport>(mc);
      mqtt->connect();
      transport = mqtt.get();
    }

    AgentConfig ac;
    ac.gateway_id = gateway_id;
    ac.card_path = card_path;
    ac.device_path = device_path;
    ac.profile_id = profile_id;
    ac.delta_t = delta_t;
    ac.timeout = std::chrono::milliseconds(timeout_ms);
    cli::ensure_parent_dir(card_path);
    cli::ensure_parent_dir(device_path);
    UserAgent agent(ac, *transport, Rng::from_system_entropy());

    if (app.got_subcommand(cmd_register)) {
      Password pw{cli::obtain_password("UGW_PASSWORD", "password: ")};
      agent.enroll(name, pw);
      if (local_gw) local_gw->persist();
      std::fprintf(stderr, "ugw-user: registered '%s'; card at %s\n",
                   name.c_str(), card_path.c_str());
    } else if (app.got_subcommand(cmd_login)) {
      Password pw{cli::obtain_password("UGW_PASSWORD", "password: ")};
      LoginResult res = agent.login(name, pw);
      cli::ensure_parent_dir(session_path);
      write_file_private(session_path, encode_session_file(res, cp));
      std::printf("%s\n", fingerprint(res.session).c_str());
      if (local_gw) {
        auto rec = local_gw->session_for(res.mid);
        std::printf("%s\n",
                    rec ? fingerprint(rec->s_k).c_str() : "no-gateway-session");
      }
      if (!echo_message.empty()) {
        Bytes reply = agent.echo(res, to_bytes(echo_message));
        std::printf("%.*s\n", static_cast<int>(reply.size()),
                    reinterpret_cast<const char*>(reply.data()));
      }
    } else if (app.got_subcommand(cmd_update)) {
      Password pw_old{cli::obtain_password("UGW_PASSWORD", "old password: ")};
      Password pw_new{
          cli::obtain_password("UGW_PASSWORD_NEW", "new password: ")};
      if (pw_new.value.empty()) {
        std::fprintf(stderr, "ugw-user: refusing an empty new password\n");
        return 1;
      }
      agent.update_password(name, pw_old, pw_new);
      std::fprintf(stderr, "ugw-user: card rewritten under the new password\n");
    } else if (app.got_subcommand(cmd_echo)) {
      LoginResult res = decode_session_file(read_file(session_path), cp);
      Bytes reply = agent.echo(res, to_bytes(echo_message));
      std::printf("%.*s\n", static_cast<int>(reply.size()),
                  reinterpret_cast<const char*>(reply.data()));
    }
    if (mqtt) mqtt->close();
    return 0;
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "ugw-user: %s\n", cli::describe_error(e).c_str());
    return cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ugw-user: %s\n", e.what());
    return 1;
  }
}
