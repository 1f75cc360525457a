// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/net/socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/eventfd.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fmt/format.h>

namespace nexus::net {
namespace {

[[noreturn]] void throw_errno(std::string_view what) {
  throw Error(Errc::kTransportError, fmt::format("{}: {}", what, std::strerror(errno)));
}

sockaddr_un unix_addr(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) {
    throw Error(Errc::kTransportError, "unix socket path too long: " + path);
  }
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  return addr;
}

sockaddr_in tcp_addr(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  std::string host = ep.host.empty() || ep.host == "localhost" ? "127.0.0.1" : ep.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
      throw Error(Errc::kTransportError, "cannot resolve host " + host);
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    freeaddrinfo(res);
  }
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

Fd& Fd::operator=(Fd&& other) noexcept {
  if (this != &other) reset(other.release());
  return *this;
}

int Fd::release() noexcept {
  int fd = fd_;
  fd_ = -1;
  return fd;
}

void Fd::reset(int fd) noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

Endpoint Endpoint::parse(std::string_view text) {
  Endpoint ep;
  if (text.starts_with("unix:")) {
    ep.kind = Kind::kUnix;
    ep.path = std::string(text.substr(5));
    return ep;
  }
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::kSchemaError, fmt::format("endpoint '{}' is not host:port or unix:<path>", text));
  }
  ep.kind = Kind::kTcp;
  ep.host = std::string(text.substr(0, colon));
  auto port = std::stoul(std::string(text.substr(colon + 1)));
  if (port > 65535) throw Error(Errc::kSchemaError, "port out of range");
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

Endpoint Endpoint::unix_path(std::string path) {
  Endpoint ep;
  ep.kind = Kind::kUnix;
  ep.path = std::move(path);
  return ep;
}

std::string Endpoint::to_string() const {
  if (kind == Kind::kUnix) return "unix:" + path;
  return fmt::format("{}:{}", host.empty() ? "127.0.0.1" : host, port);
}

std::size_t Stream::read_some(MutableByteSpan out) {
  for (;;) {
    auto n = ::recv(fd_.get(), out.data(), out.size(), 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR) continue;
    if (errno == ECONNRESET || errno == EPIPE || errno == EBADF || errno == ENOTCONN) return 0;
    throw_errno("recv");
  }
}

bool Stream::read_exact(MutableByteSpan out) {
  std::size_t got = 0;
  while (got < out.size()) {
    auto n = read_some(out.subspan(got));
    if (n == 0) {
      if (got == 0) return false;
      throw Error(Errc::kTransportError, "connection closed mid-message");
    }
    got += n;
  }
  return true;
}

void Stream::write_all(ByteSpan data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    auto n = ::send(fd_.get(), data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool Stream::readable(std::chrono::milliseconds timeout) const {
  pollfd p{fd_.get(), POLLIN, 0};
  for (;;) {
    int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc < 0 && errno == EINTR) continue;
    return rc > 0;
  }
}

void Stream::shutdown() noexcept {
  if (fd_.valid()) ::shutdown(fd_.get(), SHUT_RDWR);
}

Listener Listener::bind(const Endpoint& ep, int backlog) {
  Listener l;
  l.bound_ = ep;
  if (ep.kind == Endpoint::Kind::kUnix) {
    l.fd_.reset(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!l.fd_) throw_errno("socket");
    ::unlink(ep.path.c_str());
    auto addr = unix_addr(ep.path);
    if (::bind(l.fd_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw_errno("bind " + ep.path);
    }
  } else {
    l.fd_.reset(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!l.fd_) throw_errno("socket");
    int one = 1;
    ::setsockopt(l.fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    auto addr = tcp_addr(ep);
    if (::bind(l.fd_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw_errno("bind " + ep.to_string());
    }
    socklen_t len = sizeof(addr);
    ::getsockname(l.fd_.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    l.bound_.port = ntohs(addr.sin_port);
    if (l.bound_.host.empty()) l.bound_.host = "127.0.0.1";
  }
  if (::listen(l.fd_.get(), backlog) != 0) throw_errno("listen");
  l.wake_.reset(::eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK));
  if (!l.wake_) throw_errno("eventfd");
  return l;
}

std::optional<Stream> Listener::accept(std::optional<std::chrono::milliseconds> timeout) {
  for (;;) {
    if (!fd_.valid()) return std::nullopt;
    pollfd p[2] = {{fd_.get(), POLLIN, 0}, {wake_.get(), POLLIN, 0}};
    int rc = ::poll(p, 2, timeout ? static_cast<int>(timeout->count()) : -1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      return std::nullopt;
    }
    if (rc == 0) return std::nullopt;
    if (p[1].revents != 0) return std::nullopt;
    if (p[0].revents & (POLLHUP | POLLERR | POLLNVAL)) return std::nullopt;
    int fd = ::accept4(fd_.get(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == EAGAIN || errno == ECONNABORTED) continue;
      return std::nullopt;
    }
    if (bound_.kind == Endpoint::Kind::kTcp) set_nodelay(fd);
    return Stream(Fd(fd));
  }
}

void Listener::shutdown() noexcept {
  if (wake_.valid()) {
    std::uint64_t one = 1;
    [[maybe_unused]] auto n = ::write(wake_.get(), &one, sizeof(one));
  }
}

Stream connect(const Endpoint& ep) {
  Fd fd;
  if (ep.kind == Endpoint::Kind::kUnix) {
    fd.reset(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd) throw_errno("socket");
    auto addr = unix_addr(ep.path);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw_errno("connect " + ep.path);
    }
  } else {
    fd.reset(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd) throw_errno("socket");
    auto addr = tcp_addr(ep);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw_errno("connect " + ep.to_string());
    }
    set_nodelay(fd.get());
  }
  return Stream(std::move(fd));
}

void ignore_sigpipe() { std::signal(SIGPIPE, SIG_IGN); }

}  // namespace nexus::net
