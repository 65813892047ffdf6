#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "mini_broker.hpp"
#include "ugw/gateway.hpp"
#include "ugw/mqtt.hpp"
#include "ugw/useragent.hpp"

using namespace ugw;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

MqttConfig client_config(uint16_t port, const std::string& id) {
  MqttConfig mc;
  mc.host = "127.0.0.1";
  mc.port = port;
  mc.client_id = id;
  mc.io_timeout = 2000ms;
  return mc;
}

// One-slot mailbox for asserting on asynchronously delivered messages.
struct Mailbox {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::pair<std::string, Bytes>> items;

  void put(const std::string& topic, const Bytes& payload) {
    std::lock_guard lock(mu);
    items.emplace_back(topic, payload);
    cv.notify_all();
  }

  bool wait_for_count(size_t n, std::chrono::milliseconds budget = 2000ms) {
    std::unique_lock lock(mu);
    return cv.wait_for(lock, budget, [&] { return items.size() >= n; });
  }
};

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("ugw-mqtt-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const char* leaf) const { return (path / leaf).string(); }
};

}  // namespace

TEST_CASE("client delivers subscribed publishes") {
  testing::MiniBroker broker;
  Mailbox box;

  MqttClient client(client_config(broker.port(), "t-basic"));
  client.set_message_handler(
      [&](const std::string& t, const Bytes& p) { box.put(t, p); });
  client.connect();
  REQUIRE(client.connected());

  client.subscribe("alpha");
  Bytes payload{0x00, 0x01, 0xFF, 0x00, 0x42};  // zeros must survive
  client.publish("alpha", payload);

  REQUIRE(box.wait_for_count(1));
  CHECK(box.items[0].first == "alpha");
  CHECK(box.items[0].second == payload);

  client.disconnect();
}

TEST_CASE("publishes route between distinct clients") {
  testing::MiniBroker broker;
  Mailbox box;

  MqttClient receiver(client_config(broker.port(), "t-recv"));
  receiver.set_message_handler(
      [&](const std::string& t, const Bytes& p) { box.put(t, p); });
  receiver.connect();
  receiver.subscribe("ugw/gw0/auth/req");

  MqttClient sender(client_config(broker.port(), "t-send"));
  sender.set_message_handler([](const std::string&, const Bytes&) {});
  sender.connect();
  sender.publish("ugw/gw0/auth/req", to_bytes("hello"));
  sender.publish("ugw/gw0/other", to_bytes("not for receiver"));

  REQUIRE(box.wait_for_count(1));
  // Exact-match topics only: the second publish must never arrive.
  std::this_thread::sleep_for(50ms);
  CHECK(box.items.size() == 1);
  CHECK(box.items[0].second == to_bytes("hello"));

  sender.disconnect();
  receiver.disconnect();
}

TEST_CASE("unsubscribe stops delivery") {
  testing::MiniBroker broker;
  Mailbox box;

  MqttClient client(client_config(broker.port(), "t-unsub"));
  client.set_message_handler(
      [&](const std::string& t, const Bytes& p) { box.put(t, p); });
  client.connect();

  client.subscribe("gone");
  client.subscribe("marker");
  client.unsubscribe("gone");

  client.publish("gone", to_bytes("should not arrive"));
  client.publish("marker", to_bytes("fence"));

  REQUIRE(box.wait_for_count(1));
  std::this_thread::sleep_for(50ms);
  REQUIRE(box.items.size() == 1);
  CHECK(box.items[0].first == "marker");

  client.disconnect();
}

TEST_CASE("connecting to a dead port fails cleanly") {
  // Find a port with nothing behind it by binding and closing a socket.
  uint16_t dead_port;
  {
    testing::MiniBroker probe;
    dead_port = probe.port();
  }
  MqttConfig mc = client_config(dead_port, "t-dead");
  mc.io_timeout = 300ms;
  MqttClient client(mc);
  CHECK_THROWS_AS(client.connect(), ProtocolError);
  CHECK(!client.connected());
}

TEST_CASE("request_reply times out without a responder") {
  testing::MiniBroker broker;
  MqttTransport transport(client_config(broker.port(), "t-timeout"));
  transport.connect();

  Rng rng(404);
  try {
    request_reply(transport, "ugw/gw9/auth", to_bytes("ping"), rng, 200ms);
    FAIL("request_reply returned without a responder");
  } catch (const ProtocolError& e) {
    CHECK(e.kind() == ErrKind::kTransportFailure);
  }
  transport.close();
}

TEST_CASE("the full protocol runs over a real broker socket") {
  testing::MiniBroker broker;
  TempDir dir;

  ServiceConfig sc;
  sc.gateway_id = "gw0";
  sc.profile_id = "paper160";
  sc.rng_seed = 515;
  MqttTransport gw_transport(client_config(broker.port(), "t-gateway"));
  gw_transport.connect();
  GatewayService service(sc, FreshnessPolicy{.delta_t = 5});
  service.bind(gw_transport);

  AgentConfig ac;
  ac.gateway_id = "gw0";
  ac.card_path = dir.file("card.bin");
  ac.device_path = dir.file("device.bin");
  MqttTransport user_transport(client_config(broker.port(), "t-user"));
  user_transport.connect();

  UserAgent agent(ac, user_transport, Rng(616));
  agent.enroll("mqtt-alice", Password{"over the wire"});
  CHECK(service.registered_users() == 1);

  LoginResult res = agent.login("mqtt-alice", Password{"over the wire"});
  auto rec = service.session_for(res.mid);
  REQUIRE(rec.has_value());
  CHECK(rec->s_k.s_k == res.session.s_k);

  Bytes reply = agent.echo(res, to_bytes("echo across tcp"));
  CHECK(reply == to_bytes("echo across tcp"));
  CHECK(service.counters().echoes == 1);

  user_transport.close();
  gw_transport.close();
}
