#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "ugw/bytes.hpp"
#include "ugw/transport.hpp"

namespace ugw {

// Just enough MQTT 3.1.1 for fixed-width frames on exact-match topics:
// CONNECT/CONNACK, PUBLISH at QoS 0, SUBSCRIBE/UNSUBSCRIBE with acks,
// PINGREQ keepalive, DISCONNECT. No wildcards, no retained messages, no
// QoS 1/2, no will. The broker is expected to be a stock one (mosquitto)
// or the test harness's miniature.
struct MqttConfig {
  std::string host = "127.0.0.1";
  uint16_t port = 1883;
  std::string client_id;
  std::chrono::milliseconds keepalive{30000};
  std::chrono::milliseconds io_timeout{3000};
};

class MqttClient {
 public:
  using MessageHandler =
      std::function<void(const std::string& topic, const Bytes& payload)>;
  using DisconnectHandler = std::function<void()>;

  explicit MqttClient(MqttConfig config);
  ~MqttClient();

  MqttClient(const MqttClient&) = delete;
  MqttClient& operator=(const MqttClient&) = delete;

  // Handlers must be installed before connect(); the reader thread calls
  // them without further synchronization.
  void set_message_handler(MessageHandler handler);
  void set_disconnect_handler(DisconnectHandler handler);

  void connect();     // throws ProtocolError(kTransportFailure)
  void disconnect();  // polite DISCONNECT, then teardown
  bool connected() const { return connected_.load(); }

  void publish(const std::string& topic, const Bytes& payload);
  void subscribe(const std::string& topic);    // waits for SUBACK
  void unsubscribe(const std::string& topic);  // waits for UNSUBACK

 private:
  void send_packet(uint8_t header, const Bytes& body);
  void reader_loop();
  void handle_packet(uint8_t header, const Bytes& body);
  bool wait_ack(uint16_t packet_id);
  void teardown();

  MqttConfig config_;
  MessageHandler on_message_;
  DisconnectHandler on_disconnect_;

  int fd_ = -1;
  std::atomic<bool> connected_{false};
  std::atomic<bool> stopping_{false};
  std::thread reader_;
  std::mutex send_mu_;

  std::mutex ack_mu_;
  std::condition_variable ack_cv_;
  bool connack_seen_ = false;
  bool connack_ok_ = false;
  std::map<uint16_t, bool> acked_;  // packet id -> ack arrived
  uint16_t next_packet_id_ = 1;
};

// Transport over a real broker. Remembers subscriptions and, when the
// connection drops, reconnects with exponential backoff and re-subscribes.
// publish() while disconnected throws kTransportFailure rather than
// queueing: login frames are freshness-bound, stale sends are useless.
class MqttTransport : public Transport {
 public:
  explicit MqttTransport(MqttConfig config);
  ~MqttTransport() override;

  void connect();  // initial connection; throws on failure
  void close();

  void publish(const std::string& topic, const Bytes& payload) override;
  void subscribe(const std::string& topic, Handler handler) override;
  void unsubscribe(const std::string& topic) override;

 private:
  void dispatch(const std::string& topic, const Bytes& payload);
  void supervise();  // reconnect loop

  MqttConfig config_;
  std::unique_ptr<MqttClient> client_;
  std::mutex mu_;
  std::map<std::string, Handler> handlers_;
  std::atomic<bool> closing_{false};
  std::atomic<bool> online_{false};
  std::thread supervisor_;
  std::condition_variable wake_;
  std::mutex wake_mu_;
  bool reconnect_requested_ = false;
};

}  // namespace ugw
