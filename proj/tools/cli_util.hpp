#pragma once

// Shared plumbing for the command-line binaries: broker address parsing,
// default state paths, password prompting, exit-code mapping.

#include <termios.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>

#include "ugw/errors.hpp"

namespace ugw::cli {

// "host[:port]" -> (host, port); a bare host keeps the default port.
inline std::pair<std::string, uint16_t> parse_broker(const std::string& s,
                                                     uint16_t default_port) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos) return {s, default_port};
  std::string host = s.substr(0, colon);
  std::string port_s = s.substr(colon + 1);
  unsigned long port = std::strtoul(port_s.c_str(), nullptr, 10);
  if (host.empty() || port == 0 || port > 65535)
    throw std::invalid_argument("bad broker address '" + s +
                                "' (want host[:port])");
  return {host, static_cast<uint16_t>(port)};
}

// $HOME/.ugw/<leaf>, falling back to ./.ugw when HOME is unset.
inline std::string state_path(const std::string& leaf) {
  const char* home = std::getenv("HOME");
  std::filesystem::path base =
      (home && *home) ? std::filesystem::path(home) : std::filesystem::path(".");
  return (base / ".ugw" / leaf).string();
}

inline void ensure_parent_dir(const std::string& path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// Password resolution order: the named env var (test runs), an interactive
// prompt with echo off when stdin is a terminal, otherwise one line from
// stdin (piped use). The prompt goes to stderr so stdout stays parseable.
inline std::string obtain_password(const char* env_var, const char* prompt) {
  if (const char* env = std::getenv(env_var); env && *env) return env;
  std::string pw;
  if (::isatty(STDIN_FILENO)) {
    std::fprintf(stderr, "%s", prompt);
    termios before{};
    bool muted = ::tcgetattr(STDIN_FILENO, &before) == 0;
    if (muted) {
      termios quiet = before;
      quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
      ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &quiet);
    }
    std::getline(std::cin, pw);
    if (muted) ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &before);
    std::fprintf(stderr, "\n");
  } else {
    std::getline(std::cin, pw);
  }
  return pw;
}

// "<kind>: <what>", except when the what-string already leads with the
// kind (some throw sites do) -- no point printing it twice.
inline std::string describe_error(const ProtocolError& e) {
  std::string kind = to_string(e.kind());
  std::string what = e.what();
  if (what.compare(0, kind.size(), kind) == 0) return what;
  return kind + ": " + what;
}

// Exit-code contract shared by the binaries: 0 success, 2 identity taken,
// 3 transport, 4 local two-factor failure, 5 gateway-side rejection,
// 1 everything else.
inline int exit_code_for(const ProtocolError& e) {
  switch (e.kind()) {
    case ErrKind::kIdentityNotAvailable: return 2;
    case ErrKind::kTransportFailure: return 3;
    case ErrKind::kLocalAuthFailure: return 4;
    case ErrKind::kGatewayAuthFailure:
    case ErrKind::kAuthenticationFailure:
    case ErrKind::kFreshnessViolation:
    case ErrKind::kUnknownIdentity: return 5;
    case ErrKind::kMalformedRequest:
    case ErrKind::kStateError: return 1;
  }
  return 1;
}

}  // namespace ugw::cli
