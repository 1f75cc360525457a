// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include "nexus/common/ids.hpp"
#include "nexus/proto/envelope.hpp"
#include "nexus/proto/ingress.hpp"
#include "nexus/shmem/region.hpp"

namespace nexus::backend {

enum class WriteState { kQueued, kInFlight, kAcked, kFailed };

/// A delegated asynchronous PUT. Its slot stays pinned until it settles.
struct PendingWrite {
  Id128 invocation_id;
  Id128 idempotency_key;
  proto::ObjectRef ref;
  shmem::SlotGrant grant;
  std::atomic<WriteState> state{WriteState::kQueued};
  std::atomic<bool> body_sent{false};  // bytes on the wire, ack outstanding
  std::uint32_t attempts = 0;
  std::uint64_t version = 0;
  std::uint64_t acked_at_us = 0;
  std::string error;
};

/// Holds an invocation's final response until its delegated writes settle.
/// Releases exactly once: ok when the handler succeeded and every write was
/// acknowledged, error as soon as any write fails.
class ResponseBuffer {
 public:
  enum class Outcome { kHeld, kReleasedOk, kReleasedError };
  /// Receives the response at release; fills milestones and breakdown.
  using Sink = std::function<void(proto::IngressResponse&)>;

  explicit ResponseBuffer(Sink sink) : sink_(std::move(sink)) {}

  void add_pending();
  void write_acked(std::uint64_t at_us);
  void write_failed(const std::string& error);
  /// Buffers the handler's response; releases now if nothing is pending.
  void hold(proto::IngressResponse response);
  /// Releases an error immediately (failures before the handler ran).
  /// A no-op if the buffer already released.
  void fail_now(proto::IngressResponse response);

  Outcome outcome() const;
  std::uint32_t pending() const;
  std::uint64_t last_ack_us() const;

 private:
  void release_locked(std::unique_lock<std::mutex>& lock);

  Sink sink_;
  mutable std::mutex mu_;
  std::optional<proto::IngressResponse> held_;
  std::uint32_t pending_ = 0;
  std::uint64_t last_ack_us_ = 0;
  std::optional<std::string> failure_;
  Outcome outcome_ = Outcome::kHeld;
};

}  // namespace nexus::backend
