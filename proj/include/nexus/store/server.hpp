// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "nexus/net/socket.hpp"
#include "nexus/store/object_store.hpp"
#include "nexus/store/wire.hpp"

namespace nexus::store {

/// Network cost model applied once per request at response time.
struct StoreProfile {
  std::uint64_t one_way_latency_us = 0;
  std::uint64_t bandwidth_bps = 10'000'000'000;  // bits per second, > 0
  std::uint32_t fail_next_puts = 0;

  /// latency + size / bandwidth, in microseconds.
  std::uint64_t service_time_us(std::uint64_t size_bytes) const noexcept;
};

struct RequestRecord {
  StoreOp op{};
  ObjectRef ref;
  StoreStatus status{};
  std::uint64_t size = 0;
  std::uint64_t version = 0;
  std::uint64_t received_us = 0;
  std::uint64_t responded_us = 0;
};

/// S3-like service over the length-prefixed TCP protocol. One thread per
/// connection; a request's delay never blocks other connections.
class StoreServer {
 public:
  explicit StoreServer(StoreProfile profile = {});
  ~StoreServer();
  StoreServer(const StoreServer&) = delete;
  StoreServer& operator=(const StoreServer&) = delete;

  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  void start(const net::Endpoint& listen);
  void stop();
  const net::Endpoint& endpoint() const noexcept { return listener_.endpoint(); }

  ObjectStore& objects() noexcept { return store_; }
  const ObjectStore& objects() const noexcept { return store_; }

  void set_latency_us(std::uint64_t us) noexcept { latency_us_ = us; }
  void set_bandwidth_bps(std::uint64_t bps);
  void fail_next_puts(std::uint32_t n) noexcept { fail_next_puts_ = n; }
  StoreProfile profile() const noexcept;

  std::vector<RequestRecord> request_log() const;
  std::size_t count(StoreOp op, const ObjectRef& ref) const;
  std::size_t count(StoreOp op) const;
  void clear_log();

 private:
  void accept_loop();
  void serve(net::Stream& conn);
  void record(RequestRecord rec);

  ObjectStore store_;
  std::atomic<std::uint64_t> latency_us_;
  std::atomic<std::uint64_t> bandwidth_bps_;
  std::atomic<std::uint32_t> fail_next_puts_;

  net::Listener listener_;
  std::thread acceptor_;
  std::atomic<bool> running_{false};

  std::mutex conns_mu_;
  struct Conn {
    net::Stream stream;
    std::thread thread;
    std::atomic<bool> done{false};
  };
  std::list<std::unique_ptr<Conn>> conns_;

  mutable std::mutex log_mu_;
  std::vector<RequestRecord> log_;
};

}  // namespace nexus::store

namespace nexus::store {

/// `store` command-line entry point.
int store_main(int argc, char** argv);

}  // namespace nexus::store
