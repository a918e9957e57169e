#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace pipegen::net {

// Owning wrapper around a connected stream socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }

  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  // Writes the whole buffer or throws; a peer that hung up raises
  // ConnectionClosed, other failures raise IoError.
  void write_all(const void* data, size_t n);
  void write_all(std::span<const uint8_t> bytes) { write_all(bytes.data(), bytes.size()); }

  // Reads exactly n bytes or throws ConnectionClosed on early EOF.
  void read_exact(void* data, size_t n);

  // Like read_exact, but a clean EOF before the first byte returns false
  // (used where end-of-stream at a frame boundary is legal).
  bool read_exact_or_eof(void* data, size_t n);

  // Reads whatever is available, up to n bytes; 0 means EOF.
  size_t read_some(void* data, size_t n);

 private:
  int fd_ = -1;
};

// Owning wrapper around a listening socket bound to 0.0.0.0.
class Listener {
 public:
  Listener() = default;
  ~Listener() { close(); }

  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  Listener(Listener&& other) noexcept : fd_(other.fd_), port_(other.port_) { other.fd_ = -1; }
  Listener& operator=(Listener&& other) noexcept;

  // port 0 picks an ephemeral port; the chosen one is available via port().
  static Listener bind_any(uint16_t port);

  bool valid() const { return fd_ >= 0; }
  uint16_t port() const { return port_; }
  void close();

  Socket accept();
  // Polls for up to timeout_ms; returns nothing on timeout so callers can
  // check a stop flag between waits.
  std::optional<Socket> accept_for(int timeout_ms);

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

Socket connect_to(const std::string& host, uint16_t port);

struct Endpoint {
  std::string host;
  uint16_t port = 0;
};

// Parses "HOST:PORT"; the host part may be empty (meaning localhost).
Endpoint parse_endpoint(const std::string& text);

}  // namespace pipegen::net
