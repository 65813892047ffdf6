#include "ugw/mqtt.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "ugw/errors.hpp"

namespace ugw {

namespace {

// Packet types, upper nibble of the fixed header.
constexpr uint8_t kConnect = 0x10;
constexpr uint8_t kConnack = 0x20;
constexpr uint8_t kPublish = 0x30;
constexpr uint8_t kSubscribe = 0x82;  // type 8, reserved flags 0010
constexpr uint8_t kSuback = 0x90;
constexpr uint8_t kUnsubscribe = 0xA2;
constexpr uint8_t kUnsuback = 0xB0;
constexpr uint8_t kPingreq = 0xC0;
constexpr uint8_t kPingresp = 0xD0;
constexpr uint8_t kDisconnect = 0xE0;

void put_str(Bytes& out, std::string_view s) {
  out.push_back(static_cast<uint8_t>(s.size() >> 8));
  out.push_back(static_cast<uint8_t>(s.size() & 0xFF));
  out.insert(out.end(), s.begin(), s.end());
}

void put_u16(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v & 0xFF));
}

// Remaining-length varint: 7 bits per byte, MSB = continuation.
Bytes encode_remaining(size_t n) {
  Bytes out;
  do {
    uint8_t digit = n % 128;
    n /= 128;
    if (n > 0) digit |= 0x80;
    out.push_back(digit);
  } while (n > 0);
  return out;
}

bool send_all(int fd, const uint8_t* data, size_t len) {
  while (len > 0) {
    ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && (errno == EINTR)) continue;
      return false;
    }
    data += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

// Blocking read of exactly len bytes; false on EOF/error.
bool recv_all(int fd, uint8_t* data, size_t len) {
  while (len > 0) {
    ssize_t n = ::recv(fd, data, len, 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    data += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

int connect_tcp(const std::string& host, uint16_t port,
                std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string port_str = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0)
    return -1;

  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_NONBLOCK,
                  ai->ai_protocol);
    if (fd < 0) continue;
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd pfd{fd, POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
      int err = 0;
      socklen_t len = sizeof(err);
      if (rc == 1 && ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) == 0 &&
          err == 0)
        rc = 0;
      else
        rc = -1;
    }
    if (rc == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd >= 0) {
    // Back to blocking mode; the reader thread owns all reads.
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags & ~O_NONBLOCK);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  return fd;
}

}  // namespace

MqttClient::MqttClient(MqttConfig config) : config_(std::move(config)) {}

MqttClient::~MqttClient() { teardown(); }

void MqttClient::set_message_handler(MessageHandler handler) {
  on_message_ = std::move(handler);
}

void MqttClient::set_disconnect_handler(DisconnectHandler handler) {
  on_disconnect_ = std::move(handler);
}

void MqttClient::send_packet(uint8_t header, const Bytes& body) {
  Bytes frame;
  frame.push_back(header);
  append(frame, encode_remaining(body.size()));
  append(frame, body);
  std::lock_guard lock(send_mu_);
  if (fd_ < 0 || !send_all(fd_, frame.data(), frame.size()))
    throw ProtocolError(ErrKind::kTransportFailure, "mqtt: send failed");
}

void MqttClient::connect() {
  fd_ = connect_tcp(config_.host, config_.port, config_.io_timeout);
  if (fd_ < 0)
    throw ProtocolError(ErrKind::kTransportFailure,
                        "mqtt: cannot reach " + config_.host + ":" +
                            std::to_string(config_.port));

  Bytes body;
  put_str(body, "MQTT");
  body.push_back(0x04);  // protocol level 3.1.1
  body.push_back(0x02);  // clean session
  uint16_t keepalive_s = static_cast<uint16_t>(std::min<int64_t>(
      std::max<int64_t>(config_.keepalive.count() / 1000, 1), 0xFFFF));
  put_u16(body, keepalive_s);
  put_str(body, config_.client_id);

  {
    std::lock_guard lock(ack_mu_);
    connack_seen_ = false;
    connack_ok_ = false;
  }
  stopping_ = false;
  reader_ = std::thread([this] { reader_loop(); });
  send_packet(kConnect, body);

  std::unique_lock lock(ack_mu_);
  if (!ack_cv_.wait_for(lock, config_.io_timeout,
                        [&] { return connack_seen_; }) ||
      !connack_ok_) {
    lock.unlock();
    teardown();
    throw ProtocolError(ErrKind::kTransportFailure,
                        "mqtt: broker refused connection");
  }
  connected_ = true;
}

void MqttClient::disconnect() {
  if (connected_.exchange(false)) {
    try {
      send_packet(kDisconnect, {});
    } catch (const ProtocolError&) {
      // Socket already dead; teardown below is what matters.
    }
  }
  teardown();
}

void MqttClient::teardown() {
  stopping_ = true;
  connected_ = false;
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
  }
  if (reader_.joinable()) reader_.join();
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void MqttClient::publish(const std::string& topic, const Bytes& payload) {
  Bytes body;
  put_str(body, topic);
  append(body, payload);
  send_packet(kPublish, body);
}

bool MqttClient::wait_ack(uint16_t packet_id) {
  std::unique_lock lock(ack_mu_);
  return ack_cv_.wait_for(lock, config_.io_timeout, [&] {
    auto it = acked_.find(packet_id);
    return it != acked_.end() && it->second;
  });
}

void MqttClient::subscribe(const std::string& topic) {
  uint16_t id;
  {
    std::lock_guard lock(ack_mu_);
    id = next_packet_id_++;
    if (next_packet_id_ == 0) next_packet_id_ = 1;
    acked_[id] = false;
  }
  Bytes body;
  put_u16(body, id);
  put_str(body, topic);
  body.push_back(0x00);  // QoS 0
  send_packet(kSubscribe, body);
  bool ok = wait_ack(id);
  {
    std::lock_guard lock(ack_mu_);
    acked_.erase(id);
  }
  if (!ok)
    throw ProtocolError(ErrKind::kTransportFailure, "mqtt: no SUBACK");
}

void MqttClient::unsubscribe(const std::string& topic) {
  uint16_t id;
  {
    std::lock_guard lock(ack_mu_);
    id = next_packet_id_++;
    if (next_packet_id_ == 0) next_packet_id_ = 1;
    acked_[id] = false;
  }
  Bytes body;
  put_u16(body, id);
  put_str(body, topic);
  send_packet(kUnsubscribe, body);
  bool ok = wait_ack(id);
  {
    std::lock_guard lock(ack_mu_);
    acked_.erase(id);
  }
  if (!ok)
    throw ProtocolError(ErrKind::kTransportFailure, "mqtt: no UNSUBACK");
}

void MqttClient::reader_loop() {
  auto last_io = std::chrono::steady_clock::now();
  while (!stopping_) {
    pollfd pfd{fd_, POLLIN, 0};
    int poll_ms = static_cast<int>(
        std::min<int64_t>(config_.keepalive.count() / 2, 500));
    int rc = ::poll(&pfd, 1, std::max(poll_ms, 10));
    if (stopping_) break;
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) {
      auto idle = std::chrono::steady_clock::now() - last_io;
      if (connected_ && idle >= config_.keepalive / 2) {
        try {
          send_packet(kPingreq, {});
        } catch (const ProtocolError&) {
          break;
        }
        last_io = std::chrono::steady_clock::now();
      }
      continue;
    }

    uint8_t header;
    if (!recv_all(fd_, &header, 1)) break;
    // Remaining length, up to four varint bytes.
    size_t remaining = 0;
    size_t shift = 0;
    bool length_ok = false;
    for (int i = 0; i < 4; ++i) {
      uint8_t b;
      if (!recv_all(fd_, &b, 1)) {
        shift = SIZE_MAX;
        break;
      }
      remaining |= static_cast<size_t>(b & 0x7F) << shift;
      shift += 7;
      if (!(b & 0x80)) {
        length_ok = true;
        break;
      }
    }
    if (!length_ok) break;
    Bytes body(remaining);
    if (remaining > 0 && !recv_all(fd_, body.data(), remaining)) break;
    last_io = std::chrono::steady_clock::now();
    handle_packet(header, body);
  }

  bool was_connected = connected_.exchange(false);
  {
    // Unblock anyone waiting for an ack that will never come.
    std::lock_guard lock(ack_mu_);
    connack_seen_ = true;
  }
  ack_cv_.notify_all();
  if (was_connected && !stopping_ && on_disconnect_) on_disconnect_();
}

void MqttClient::handle_packet(uint8_t header, const Bytes& body) {
  switch (header & 0xF0) {
    case kConnack & 0xF0: {
      std::lock_guard lock(ack_mu_);
      connack_seen_ = true;
      connack_ok_ = body.size() >= 2 && body[1] == 0x00;
      ack_cv_.notify_all();
      break;
    }
    case kSuback & 0xF0:
    case kUnsuback & 0xF0: {
      if (body.size() < 2) break;
      uint16_t id = static_cast<uint16_t>((body[0] << 8) | body[1]);
      std::lock_guard lock(ack_mu_);
      auto it = acked_.find(id);
      if (it != acked_.end()) it->second = true;
      ack_cv_.notify_all();
      break;
    }
    case kPublish & 0xF0: {
      if (body.size() < 2) break;
      size_t tlen = (static_cast<size_t>(body[0]) << 8) | body[1];
      if (body.size() < 2 + tlen) break;
      std::string topic(body.begin() + 2, body.begin() + 2 + tlen);
      // QoS 0 only: no packet id between topic and payload.
      Bytes payload(body.begin() + 2 + tlen, body.end());
      if (on_message_) on_message_(topic, payload);
      break;
    }
    case kPingresp & 0xF0:
      break;  // keepalive satisfied
    default:
      break;  // unknown packets are ignored, not fatal
  }
}

MqttTransport::MqttTransport(MqttConfig config) : config_(std::move(config)) {}

MqttTransport::~MqttTransport() { close(); }

void MqttTransport::connect() {
  client_ = std::make_unique<MqttClient>(config_);
  client_->set_message_handler(
      [this](const std::string& topic, const Bytes& payload) {
        dispatch(topic, payload);
      });
  client_->set_disconnect_handler([this] {
    {
      std::lock_guard lock(wake_mu_);
      reconnect_requested_ = true;
    }
    online_ = false;
    wake_.notify_all();
  });
  client_->connect();
  online_ = true;
  supervisor_ = std::thread([this] { supervise(); });
}

void MqttTransport::close() {
  closing_ = true;
  wake_.notify_all();
  if (supervisor_.joinable()) supervisor_.join();
  if (client_) client_->disconnect();
  client_.reset();
}

void MqttTransport::dispatch(const std::string& topic, const Bytes& payload) {
  Handler handler;
  {
    std::lock_guard lock(mu_);
    auto it = handlers_.find(topic);
    if (it == handlers_.end()) return;
    handler = it->second;
  }
  handler(topic, payload);
}

void MqttTransport::supervise() {
  auto backoff = std::chrono::milliseconds(250);
  const auto backoff_cap = std::chrono::milliseconds(5000);
  while (!closing_) {
    {
      std::unique_lock lock(wake_mu_);
      wake_.wait(lock, [&] { return reconnect_requested_ || closing_.load(); });
      if (closing_) return;
      reconnect_requested_ = false;
    }
    while (!closing_) {
      std::this_thread::sleep_for(backoff);
      try {
        auto fresh = std::make_unique<MqttClient>(config_);
        fresh->set_message_handler(
            [this](const std::string& topic, const Bytes& payload) {
              dispatch(topic, payload);
            });
        fresh->set_disconnect_handler([this] {
          {
            std::lock_guard lock(wake_mu_);
            reconnect_requested_ = true;
          }
          online_ = false;
          wake_.notify_all();
        });
        fresh->connect();
        std::vector<std::string> topics;
        {
          std::lock_guard lock(mu_);
          for (const auto& [topic, _] : handlers_) topics.push_back(topic);
        }
        for (const auto& t : topics) fresh->subscribe(t);
        client_ = std::move(fresh);
        online_ = true;
        backoff = std::chrono::milliseconds(250);
        break;
      } catch (const ProtocolError&) {
        backoff = std::min(backoff * 2, backoff_cap);
      }
    }
  }
}

void MqttTransport::publish(const std::string& topic, const Bytes& payload) {
  if (!online_ || !client_)
    throw ProtocolError(ErrKind::kTransportFailure, "mqtt: not connected");
  client_->publish(topic, payload);
}

void MqttTransport::subscribe(const std::string& topic, Handler handler) {
  {
    std::lock_guard lock(mu_);
    handlers_[topic] = std::move(handler);
  }
  if (online_ && client_) client_->subscribe(topic);
}

void MqttTransport::unsubscribe(const std::string& topic) {
  {
    std::lock_guard lock(mu_);
    handlers_.erase(topic);
  }
  if (online_ && client_) {
    try {
      client_->unsubscribe(topic);
    } catch (const ProtocolError&) {
      // Connection died mid-unsubscribe; the handler is gone locally,
      // which is the part that matters.
    }
  }
}

}  // namespace ugw
