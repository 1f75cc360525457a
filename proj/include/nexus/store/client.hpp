// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "nexus/net/socket.hpp"
#include "nexus/proto/envelope.hpp"
#include "nexus/store/wire.hpp"

namespace nexus::store {

using proto::ObjectRef;

struct ObjectInfo {
  std::uint64_t version = 0;
  std::uint64_t size = 0;
};

/// One connection to the store; one request at a time. GET and PUT are
/// split into steps so bodies can move straight between the socket and a
/// caller-chosen buffer (a shared-memory slot, a ring chunk).
class StoreConnection {
 public:
  explicit StoreConnection(const net::Endpoint& ep);

  /// Sends a GET and waits for the response header. Returns the body size;
  /// the caller must then consume exactly that many bytes with read_body.
  /// Throws NotFound or StoreError.
  std::uint64_t begin_get(const ObjectRef& ref);
  /// begin_get in two halves: the request goes on the wire first.
  void send_get(const ObjectRef& ref);
  std::uint64_t await_get(const ObjectRef& ref);
  void read_body(MutableByteSpan out);

  void begin_put(const ObjectRef& ref, std::uint64_t length);
  void write_body(ByteSpan data);
  /// Waits for the acknowledgment. Returns the stored version; throws
  /// InjectedFailure or StoreError.
  std::uint64_t finish_put();

  std::optional<ObjectInfo> head(const ObjectRef& ref);

  /// False once a request was abandoned midway or the peer failed.
  bool reusable() const noexcept { return pending_ == 0 && !broken_; }
  void shutdown() noexcept { stream_.shutdown(); }

 private:
  void send_header(StoreOp op, const ObjectRef& ref, std::uint64_t payload);
  std::pair<StoreStatus, std::uint64_t> read_status();
  [[noreturn]] void raise(StoreStatus status, std::uint64_t body_len, const ObjectRef& ref);

  net::Stream stream_;
  std::uint64_t pending_ = 0;  // body bytes owed in the current step
  bool broken_ = false;
};

/// Thread-safe pool of store connections.
class StoreClient {
 public:
  explicit StoreClient(net::Endpoint ep);

  class Lease {
   public:
    Lease(StoreClient& owner, std::unique_ptr<StoreConnection> conn)
        : owner_(&owner), conn_(std::move(conn)) {}
    Lease(Lease&&) noexcept = default;
    Lease& operator=(Lease&&) noexcept = default;
    ~Lease();
    StoreConnection* operator->() const noexcept { return conn_.get(); }
    StoreConnection& operator*() const noexcept { return *conn_; }

   private:
    StoreClient* owner_;
    std::unique_ptr<StoreConnection> conn_;
  };

  Lease acquire();

  Bytes get(const ObjectRef& ref);
  std::uint64_t put(const ObjectRef& ref, ByteSpan data);
  std::optional<ObjectInfo> head(const ObjectRef& ref);

  const net::Endpoint& endpoint() const noexcept { return ep_; }

 private:
  void give_back(std::unique_ptr<StoreConnection> conn);

  net::Endpoint ep_;
  std::mutex mu_;
  std::vector<std::unique_ptr<StoreConnection>> idle_;
};

}  // namespace nexus::store
