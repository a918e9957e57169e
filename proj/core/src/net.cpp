#include "pipegen/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "pipegen/error.hpp"

namespace pipegen::net {

namespace {

[[noreturn]] void raise_errno(const std::string& what) {
  raise(ErrorCode::IoError, what + ": " + std::strerror(errno));
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::write_all(const void* data, size_t n) {
  const char* p = static_cast<const char*>(data);
  while (n > 0) {
    const ssize_t sent = ::send(fd_, p, n, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE || errno == ECONNRESET) {
        raise(ErrorCode::ConnectionClosed, "peer closed the connection mid-write");
      }
      raise_errno("send");
    }
    p += sent;
    n -= static_cast<size_t>(sent);
  }
}

void Socket::read_exact(void* data, size_t n) {
  if (!read_exact_or_eof(data, n)) {
    raise(ErrorCode::ConnectionClosed, "peer closed the connection before the expected bytes arrived");
  }
}

bool Socket::read_exact_or_eof(void* data, size_t n) {
  char* p = static_cast<char*>(data);
  size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd_, p + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == ECONNRESET) {
        raise(ErrorCode::ConnectionClosed, "peer reset the connection");
      }
      raise_errno("recv");
    }
    if (r == 0) {
      if (got == 0) return false;
      raise(ErrorCode::ConnectionClosed, "peer closed the connection mid-message");
    }
    got += static_cast<size_t>(r);
  }
  return true;
}

size_t Socket::read_some(void* data, size_t n) {
  while (true) {
    const ssize_t r = ::recv(fd_, data, n, 0);
    if (r >= 0) return static_cast<size_t>(r);
    if (errno == EINTR) continue;
    if (errno == ECONNRESET) {
      raise(ErrorCode::ConnectionClosed, "peer reset the connection");
    }
    raise_errno("recv");
  }
}

Listener& Listener::operator=(Listener&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    port_ = other.port_;
    other.fd_ = -1;
  }
  return *this;
}

void Listener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Listener Listener::bind_any(uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) raise_errno("socket");
  Listener listener;
  listener.fd_ = fd;

  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    raise_errno("bind to port " + std::to_string(port));
  }
  if (::listen(fd, 128) < 0) raise_errno("listen");

  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) < 0) raise_errno("getsockname");
  listener.port_ = ntohs(addr.sin_port);
  return listener;
}

Socket Listener::accept() {
  while (true) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return Socket(fd);
    if (errno == EINTR) continue;
    raise_errno("accept");
  }
}

std::optional<Socket> Listener::accept_for(int timeout_ms) {
  pollfd pfd{fd_, POLLIN, 0};
  while (true) {
    const int r = ::poll(&pfd, 1, timeout_ms);
    if (r < 0) {
      if (errno == EINTR) continue;
      raise_errno("poll");
    }
    if (r == 0) return std::nullopt;
    return accept();
  }
}

Socket connect_to(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* results = nullptr;
  const std::string service = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? "127.0.0.1" : host.c_str(), service.c_str(), &hints, &results);
  if (rc != 0) {
    raise(ErrorCode::IoError, "resolve " + host + ": " + gai_strerror(rc));
  }

  int last_errno = 0;
  for (addrinfo* ai = results; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(results);
      return Socket(fd);
    }
    last_errno = errno;
    ::close(fd);
  }
  ::freeaddrinfo(results);
  errno = last_errno;
  raise_errno("connect to " + host + ":" + service);
}

Endpoint parse_endpoint(const std::string& text) {
  const size_t colon = text.rfind(':');
  if (colon == std::string::npos) {
    raise(ErrorCode::MalformedRequest, "endpoint \"" + text + "\" is not HOST:PORT");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  const std::string port_text = text.substr(colon + 1);
  uint16_t port = 0;
  auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || end != port_text.data() + port_text.size() || port_text.empty()) {
    raise(ErrorCode::MalformedRequest, "endpoint \"" + text + "\" has a bad port");
  }
  ep.port = port;
  return ep;
}

}  // namespace pipegen::net
