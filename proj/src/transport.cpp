#include "ugw/transport.hpp"

#include "ugw/errors.hpp"
#include "ugw/wire.hpp"

namespace ugw {

void LoopbackBus::publish(const std::string& topic, const Bytes& payload) {
  Tap tap;
  {
    std::lock_guard lock(mu_);
    tap = tap_;
  }
  Bytes delivered = payload;
  if (tap) {
    // Runs unlocked so the tap may itself deliver (replay, injection)
    // without deadlocking against the handler registry.
    auto verdict = tap(topic, payload);
    if (!verdict) return;  // dropped by the adversary
    delivered = std::move(*verdict);
  }
  deliver(topic, delivered);
}

void LoopbackBus::subscribe(const std::string& topic, Handler handler) {
  std::lock_guard lock(mu_);
  handlers_[topic] = std::move(handler);
}

void LoopbackBus::unsubscribe(const std::string& topic) {
  std::lock_guard lock(mu_);
  handlers_.erase(topic);
}

void LoopbackBus::set_tap(Tap tap) {
  std::lock_guard lock(mu_);
  tap_ = std::move(tap);
}

void LoopbackBus::clear_tap() {
  std::lock_guard lock(mu_);
  tap_ = nullptr;
}

void LoopbackBus::deliver(const std::string& topic, const Bytes& payload) {
  Handler handler;
  {
    std::lock_guard lock(mu_);
    auto it = handlers_.find(topic);
    if (it == handlers_.end()) return;  // no subscriber: frame is lost
    handler = it->second;
  }
  handler(topic, payload);
}

Bytes request_reply(Transport& transport, const std::string& topic_prefix,
                    const Bytes& body, Rng& rng,
                    std::chrono::milliseconds timeout) {
  Bytes nonce = rng.bytes(kEnvelopeNonceBytes);
  std::string resp_topic = topic_prefix + "/resp/" + to_hex(nonce);

  std::mutex mu;
  std::condition_variable cv;
  std::optional<Bytes> reply;
  transport.subscribe(resp_topic,
                      [&](const std::string&, const Bytes& payload) {
                        std::lock_guard lock(mu);
                        reply = payload;
                        cv.notify_all();
                      });

  transport.publish(topic_prefix + "/req", envelope_wrap(nonce, body));

  std::unique_lock lock(mu);
  bool got = cv.wait_for(lock, timeout, [&] { return reply.has_value(); });
  lock.unlock();
  transport.unsubscribe(resp_topic);
  if (!got)
    throw ProtocolError(ErrKind::kTransportFailure,
                        "no reply on " + resp_topic);
  return *reply;
}

}  // namespace ugw
