#pragma once

#include <stdexcept>
#include <string>

namespace ugw {

// Rejection causes. The wire never distinguishes them (login failures are a
// uniform one-byte frame); the kinds exist for logs, counters and tests.
enum class ErrKind {
  kMalformedRequest,         // frame fails structural validation
  kFreshnessViolation,       // timestamp outside the delta-t window
  kUnknownIdentity,          // mid/uid not present or not active
  kAuthenticationFailure,    // gateway-side verification mismatch
  kLocalAuthFailure,         // user-side two-factor gate (x_i) mismatch
  kGatewayAuthFailure,       // user-side response verification (sq) mismatch
  kIdentityNotAvailable,     // registration with an already-taken uid
  kTransportFailure,         // no broker / timeout / connection lost
  kStateError,               // corrupt or missing local state files
};

inline const char* to_string(ErrKind kind) {
  switch (kind) {
    case ErrKind::kMalformedRequest: return "malformed request";
    case ErrKind::kFreshnessViolation: return "freshness violation";
    case ErrKind::kUnknownIdentity: return "unknown identity";
    case ErrKind::kAuthenticationFailure: return "authentication failure";
    case ErrKind::kLocalAuthFailure: return "local authentication failure";
    case ErrKind::kGatewayAuthFailure: return "gateway authentication failure";
    case ErrKind::kIdentityNotAvailable: return "identity not available";
    case ErrKind::kTransportFailure: return "transport failure";
    case ErrKind::kStateError: return "state error";
  }
  return "unknown error";
}

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

}  // namespace ugw
