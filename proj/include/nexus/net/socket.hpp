// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "nexus/common/bytes.hpp"

namespace nexus::net {

/// Owning file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) noexcept : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept;
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  explicit operator bool() const noexcept { return valid(); }
  int release() noexcept;
  void reset(int fd = -1) noexcept;

 private:
  int fd_ = -1;
};

/// "host:port" is TCP; "unix:<path>" is a Unix-domain stream socket.
struct Endpoint {
  enum class Kind { kTcp, kUnix } kind = Kind::kTcp;
  std::string host;
  std::uint16_t port = 0;
  std::string path;

  static Endpoint parse(std::string_view text);
  static Endpoint unix_path(std::string path);
  std::string to_string() const;
};

/// Connected byte stream. Reads and writes block; errors raise
/// TransportError. Safe to shut down from another thread.
class Stream {
 public:
  Stream() = default;
  explicit Stream(Fd fd) : fd_(std::move(fd)) {}

  bool valid() const noexcept { return fd_.valid(); }
  int fd() const noexcept { return fd_.get(); }

  /// Returns bytes read; 0 means orderly end of stream.
  std::size_t read_some(MutableByteSpan out);
  /// Fills `out` completely or throws TransportError (TruncatedFrame is the
  /// caller's interpretation of a short read at a frame boundary).
  /// Returns false if the stream ended before the first byte.
  bool read_exact(MutableByteSpan out);
  void write_all(ByteSpan data);
  /// True when a read would not block (data or EOF pending).
  bool readable(std::chrono::milliseconds timeout = std::chrono::milliseconds(0)) const;
  void shutdown() noexcept;
  void close() noexcept { fd_.reset(); }

 private:
  Fd fd_;
};

class Listener {
 public:
  Listener() = default;
  /// Binds and listens. TCP port 0 picks an ephemeral port; a stale Unix
  /// socket file at the path is replaced.
  static Listener bind(const Endpoint& ep, int backlog = 128);

  /// Blocks until a connection arrives, the timeout passes (nullopt) or the
  /// listener is shut down (nullopt).
  std::optional<Stream> accept(std::optional<std::chrono::milliseconds> timeout = std::nullopt);
  const Endpoint& endpoint() const noexcept { return bound_; }
  void shutdown() noexcept;
  bool valid() const noexcept { return fd_.valid(); }

 private:
  Fd fd_;
  Fd wake_;
  Endpoint bound_;
};

Stream connect(const Endpoint& ep);

/// Ignores SIGPIPE process-wide so broken connections surface as errors.
void ignore_sigpipe();

}  // namespace nexus::net
