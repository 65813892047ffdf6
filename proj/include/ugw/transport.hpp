#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "ugw/bytes.hpp"
#include "ugw/rng.hpp"

namespace ugw {

// Minimal publish/subscribe surface: enough for fixed-width frames on
// exact-match topics. Implementations: LoopbackBus (in-process) and
// MqttTransport (real broker).
class Transport {
 public:
  using Handler =
      std::function<void(const std::string& topic, const Bytes& payload)>;

  virtual ~Transport() = default;
  virtual void publish(const std::string& topic, const Bytes& payload) = 0;
  virtual void subscribe(const std::string& topic, Handler handler) = 0;
  virtual void unsubscribe(const std::string& topic) = 0;
};

// In-process bus. Publish dispatches synchronously on the caller's thread;
// handlers run outside the registry lock, so they may publish or subscribe
// reentrantly (a request handler answering on a response topic is the
// normal case).
class LoopbackBus : public Transport {
 public:
  // Interference point for attack scenarios: sees every published frame
  // before delivery and decides what (if anything) the subscriber gets.
  // Returning std::nullopt drops the frame; returning bytes delivers those
  // instead. The tap itself may publish, giving replay and injection.
  using Tap = std::function<std::optional<Bytes>(const std::string& topic,
                                                 const Bytes& payload)>;

  void publish(const std::string& topic, const Bytes& payload) override;
  void subscribe(const std::string& topic, Handler handler) override;
  void unsubscribe(const std::string& topic) override;

  void set_tap(Tap tap);
  void clear_tap();

  // Delivers directly to the subscriber, bypassing the tap. This is the
  // adversary's own send primitive: its forged frames must not loop back
  // through its own interception hook.
  void deliver(const std::string& topic, const Bytes& payload);

 private:
  std::mutex mu_;
  std::map<std::string, Handler> handlers_;
  Tap tap_;
};

// One blocking request/response exchange: wraps `body` in a fresh 8-byte
// correlation nonce, publishes to `<prefix>/req`, waits for the bare reply
// on `<prefix>/resp/<nonce-hex>`. Throws kTransportFailure on timeout.
Bytes request_reply(Transport& transport, const std::string& topic_prefix,
                    const Bytes& body, Rng& rng,
                    std::chrono::milliseconds timeout);

}  // namespace ugw
