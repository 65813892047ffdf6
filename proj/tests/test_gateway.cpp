#include <algorithm>
#include <atomic>
#include <cstring>
#include <filesystem>
#include <set>
#include <thread>

#include "doctest.h"
#include "ugw/gateway.hpp"
#include "ugw/useragent.hpp"
#include "ugw/wire.hpp"

using namespace ugw;
namespace fs = std::filesystem;

namespace {

constexpr uint32_t kT0 = 1'700'000'000;

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("ugw-gw-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& leaf) const {
    return (path / leaf).string();
  }
};

ServiceConfig in_memory_config(uint64_t seed) {
  ServiceConfig sc;
  sc.gateway_id = "gw0";
  sc.profile_id = "paper160";
  sc.rng_seed = seed;
  return sc;
}

AgentConfig agent_config(const TempDir& dir, const std::string& who,
                         uint32_t t, const std::string& profile = "paper160") {
  AgentConfig ac;
  ac.gateway_id = "gw0";
  ac.card_path = dir.file(who + "-card.bin");
  ac.device_path = dir.file(who + "-device.bin");
  ac.profile_id = profile;
  ac.clock = [t] { return t; };
  return ac;
}

FreshnessPolicy pinned(uint32_t t) {
  return FreshnessPolicy{.delta_t = 5, .now = [t] { return t; }};
}

bool contains(const Bytes& hay, std::span<const uint8_t> needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) !=
         hay.end();
}

}  // namespace

TEST_CASE("end-to-end enroll, login and echo over the loopback bus") {
  for (const char* profile : {"paper160", "tiny97"}) {
    TempDir dir;
    LoopbackBus bus;
    ServiceConfig sc = in_memory_config(101);
    sc.profile_id = profile;
    GatewayService service(sc, pinned(kT0));
    service.bind(bus);

    AgentConfig ac = agent_config(dir, "alice", kT0, profile);
    UserAgent agent(ac, bus, Rng(202));

    agent.enroll("alice", Password{"a long password"});
    CHECK(service.registered_users() == 1);
    CHECK(service.counters().registrations == 1);

    LoginResult res = agent.login("alice", Password{"a long password"});
    CHECK(service.counters().logins == 1);
    CHECK(service.active_sessions() == 1);

    auto rec = service.session_for(res.mid);
    REQUIRE(rec.has_value());
    CHECK(rec->s_k.s_k == res.session.s_k);
    CHECK(rec->uid == Identity::from_name("alice").uid);

    Bytes reply = agent.echo(res, to_bytes("liveness check"));
    CHECK(reply == to_bytes("liveness check"));
    CHECK(service.counters().echoes == 1);
  }
}

TEST_CASE("a wrong password never reaches the service") {
  TempDir dir;
  LoopbackBus bus;
  GatewayService service(in_memory_config(103), pinned(kT0));
  service.bind(bus);

  UserAgent agent(agent_config(dir, "bob", kT0), bus, Rng(204));
  agent.enroll("bob", Password{"right"});

  size_t frames = 0;
  bus.set_tap([&](const std::string&, const Bytes& payload) {
    ++frames;
    return std::optional<Bytes>(payload);
  });
  CHECK_THROWS_AS(agent.login("bob", Password{"wrong"}), ProtocolError);
  bus.clear_tap();

  CHECK(frames == 0);  // the local gate failed before any send
  auto c = service.counters();
  CHECK(c.logins == 0);
  CHECK(c.auth_failures == 0);
}

TEST_CASE("service state survives a restart") {
  TempDir dir;
  ServiceConfig sc = in_memory_config(105);
  sc.registry_path = dir.file("registry.bin");
  sc.secret_store_path = dir.file("secrets.bin");
  sc.secret_passphrase = "ops secret";

  AgentConfig ac = agent_config(dir, "carol", kT0);

  {
    LoopbackBus bus;
    GatewayService service(sc, pinned(kT0));
    service.bind(bus);
    UserAgent agent(ac, bus, Rng(206));
    agent.enroll("carol", Password{"pw"});
    service.persist();
  }

  // A new process: same files, fresh service instance.
  LoopbackBus bus;
  GatewayService revived(sc, pinned(kT0 + 60));
  revived.bind(bus);
  CHECK(revived.registered_users() == 1);

  AgentConfig ac2 = agent_config(dir, "carol", kT0 + 60);
  UserAgent agent(ac2, bus, Rng(207));
  LoginResult res = agent.login("carol", Password{"pw"});
  auto rec = revived.session_for(res.mid);
  REQUIRE(rec.has_value());
  CHECK(rec->s_k.s_k == res.session.s_k);

  // The wrong passphrase refuses to even construct the service.
  ServiceConfig bad = sc;
  bad.secret_passphrase = "not the ops secret";
  CHECK_THROWS_AS(GatewayService(bad, pinned(kT0)), ProtocolError);
}

TEST_CASE("malformed frames are counted and change nothing") {
  LoopbackBus bus;
  GatewayService service(in_memory_config(107), pinned(kT0));

  // Structurally hopeless bodies.
  CHECK(service.handle_login(Bytes{}) == login_failure_frame());
  CHECK(service.handle_login(Bytes(13, 0xaa)) == login_failure_frame());
  CHECK(service.handle_login(Bytes(85, 0x00)) == login_failure_frame());
  CHECK(service.counters().malformed == 3);

  // Right length, unknown pseudonym (with a fresh stamp so the lookup is
  // what fails).
  LoginRequest fake;
  fake.t_ki = kT0;
  fake.pid.v.fill(0x11);
  fake.mid.v.fill(0x22);
  fake.z_login.fill(0x33);
  CHECK(service.handle_login(encode_login_request(fake)) ==
        login_failure_frame());
  CHECK(service.counters().unknown_identity == 1);

  CHECK(service.handle_register(Bytes(7, 0x01)) ==
        register_failure_frame(kRegFailMalformed));
  CHECK(service.handle_echo(Bytes(5, 0x02)) == login_failure_frame());

  CHECK(service.registered_users() == 0);
  CHECK(service.active_sessions() == 0);
  CHECK(service.counters().logins == 0);
}

TEST_CASE("duplicate registration is refused with the taken code") {
  const CurveParams& cp = paper160();
  GatewayService service(in_memory_config(109), pinned(kT0));

  Rng rng(210);
  UserSetupBegin begin = setup_user_begin(cp, rng);
  Identity id = Identity::from_name("dave");
  RegisterFrame frame;
  Bytes d_enc = encode_point(begin.d_u, cp);
  std::copy(d_enc.begin(), d_enc.end(), frame.d_u.begin());
  frame.request.uid = id.uid;
  frame.request.h_i = hash160(to_bytes("whatever"));

  Bytes first = service.handle_register(encode_register_frame(frame));
  CHECK(first.size() == kRegisterReplyBytes);
  CHECK(service.registered_users() == 1);

  Bytes second = service.handle_register(encode_register_frame(frame));
  CHECK(second == register_failure_frame(kRegFailIdentityTaken));
  CHECK(service.registered_users() == 1);
}

TEST_CASE("the duplicate-stamp cache blocks same-second repeats") {
  TempDir dir;
  LoopbackBus bus;
  GatewayService service(in_memory_config(111), pinned(kT0));
  service.bind(bus);

  UserAgent agent(agent_config(dir, "erin", kT0), bus, Rng(212));
  agent.enroll("erin", Password{"pw"});
  agent.login("erin", Password{"pw"});

  // Same fake second: the stamp is already in the cache.
  CHECK_THROWS_AS(agent.login("erin", Password{"pw"}), ProtocolError);
  CHECK(service.counters().replays == 1);

  // One second later the stamp differs and login works again.
  AgentConfig later = agent_config(dir, "erin", kT0 + 1);
  UserAgent agent2(later, bus, Rng(213));
  agent2.login("erin", Password{"pw"});
  CHECK(service.counters().logins == 2);
}

TEST_CASE("clock skew past the window is rejected as stale") {
  TempDir dir;
  LoopbackBus bus;
  GatewayService service(in_memory_config(113), pinned(kT0 + 10));
  service.bind(bus);

  UserAgent agent(agent_config(dir, "frank", kT0), bus, Rng(214));
  agent.enroll("frank", Password{"pw"});
  CHECK_THROWS_AS(agent.login("frank", Password{"pw"}), ProtocolError);
  CHECK(service.counters().freshness == 1);
  CHECK(service.active_sessions() == 0);
}

TEST_CASE("echo frames authenticate under the session key") {
  TempDir dir;
  LoopbackBus bus;
  GatewayService service(in_memory_config(115), pinned(kT0));
  service.bind(bus);

  UserAgent agent(agent_config(dir, "grace", kT0), bus, Rng(216));
  agent.enroll("grace", Password{"pw"});
  LoginResult res = agent.login("grace", Password{"pw"});

  SUBCASE("wrong key fails authentication") {
    SymmetricKey wrong;
    wrong.v.fill(0x5a);
    Bytes forged = encode_echo_request(res.mid, wrong, to_bytes("hi"));
    CHECK(service.handle_echo(forged) == login_failure_frame());
    CHECK(service.counters().auth_failures == 1);
  }

  SUBCASE("unknown pseudonym is refused") {
    Digest160 ghost;
    ghost.v.fill(0x77);
    SymmetricKey k = derive_echo_key(res.session);
    Bytes forged = encode_echo_request(ghost, k, to_bytes("hi"));
    CHECK(service.handle_echo(forged) == login_failure_frame());
    CHECK(service.counters().unknown_identity == 1);
  }

  SUBCASE("binary payloads round-trip") {
    Bytes blob;
    for (int i = 0; i < 256; ++i) blob.push_back(uint8_t(i));
    CHECK(agent.echo(res, blob) == blob);
  }
}

TEST_CASE("public frames never carry secret material") {
  TempDir dir;
  LoopbackBus bus;
  ServiceConfig sc = in_memory_config(117);
  sc.secret_store_path = dir.file("secrets.bin");
  sc.secret_passphrase = "scan";
  GatewayService service(sc, pinned(kT0));
  service.bind(bus);

  std::vector<Bytes> public_frames;
  bus.set_tap([&](const std::string& topic, const Bytes& payload) {
    if (topic.find("/reg") == std::string::npos)  // setup channel is private
      public_frames.push_back(payload);
    return std::optional<Bytes>(payload);
  });

  UserAgent agent(agent_config(dir, "heidi", kT0), bus, Rng(218));
  Password pw{"heidi's password, very secret"};
  agent.enroll("heidi", pw);
  service.persist();
  LoginResult res = agent.login("heidi", pw);
  agent.echo(res, to_bytes("checking the channel"));
  bus.clear_tap();

  REQUIRE(public_frames.size() >= 4);  // login req/resp + echo req/resp

  const CurveParams& cp = paper160();
  auto device = decode_device_state(read_file(dir.file("heidi-device.bin")),
                                    cp);
  REQUIRE(device.has_value());
  SecretStore store =
      load_secret_store(dir.file("secrets.bin"), cp, "scan");
  auto entry = store.find(res.mid);
  REQUIRE(entry.has_value());

  Identity id = Identity::from_name("heidi");
  std::vector<Bytes> needles = {
      Bytes(id.uid.bytes().begin(), id.uid.bytes().end()),
      to_bytes("heidi"),
      to_bytes(pw.value),
      encode_point(device->d_u, cp),
      encode_point(device->s_i, cp),
      Bytes(device->k_u.bytes().begin(), device->k_u.bytes().end()),
      Bytes(entry->secrets.k_gw.bytes().begin(),
            entry->secrets.k_gw.bytes().end()),
      encode_scalar(device->ur_i),
      encode_scalar(entry->secrets.gwr_j),
      Bytes(res.session.s_k.bytes().begin(), res.session.s_k.bytes().end()),
  };

  for (const Bytes& frame : public_frames)
    for (const Bytes& needle : needles) CHECK(!contains(frame, needle));
}

TEST_CASE("distinct users log in concurrently with distinct keys") {
  TempDir dir;
  LoopbackBus bus;
  GatewayService service(in_memory_config(119), pinned(kT0));
  service.bind(bus);

  constexpr int kUsers = 8;
  std::vector<std::thread> threads;
  std::vector<std::string> keys(kUsers);
  std::atomic<int> failures{0};

  for (int i = 0; i < kUsers; ++i) {
    threads.emplace_back([&, i] {
      try {
        std::string who = "user-" + std::to_string(i);
        UserAgent agent(agent_config(dir, who, kT0), bus,
                        Rng(300 + uint64_t(i)));
        agent.enroll(who, Password{"pw-" + who});
        LoginResult res = agent.login(who, Password{"pw-" + who});
        keys[i] = res.session.s_k.hex();
      } catch (...) {
        failures.fetch_add(1);
      }
    });
  }
  for (auto& t : threads) t.join();

  CHECK(failures.load() == 0);
  CHECK(service.registered_users() == kUsers);
  CHECK(service.counters().logins == kUsers);

  std::set<std::string> unique(keys.begin(), keys.end());
  CHECK(unique.size() == kUsers);
}

TEST_CASE("agent refuses to start a login without its state files") {
  TempDir dir;
  LoopbackBus bus;
  GatewayService service(in_memory_config(121), pinned(kT0));
  service.bind(bus);

  UserAgent agent(agent_config(dir, "nobody", kT0), bus, Rng(222));
  try {
    agent.login("nobody", Password{"pw"});
    FAIL("login worked without enrollment");
  } catch (const ProtocolError& e) {
    CHECK(e.kind() == ErrKind::kStateError);
  }
}
