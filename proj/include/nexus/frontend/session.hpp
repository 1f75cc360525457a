// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

#include "nexus/frontend/object_client.hpp"
#include "nexus/net/socket.hpp"
#include "nexus/proto/frame.hpp"
#include "nexus/proto/messages.hpp"
#include "nexus/shmem/region.hpp"
#include "nexus/shmem/ring.hpp"

namespace nexus::frontend {

struct AttachOptions {
  /// Total time spent retrying a refused connect before AttachError.
  std::uint64_t retry_budget_us = 3'000'000;
  std::uint64_t first_backoff_us = 5'000;
  std::uint64_t max_backoff_us = 200'000;
};

/// Guest end of the control channel plus the attached region. One
/// invocation at a time; requests are issued sequentially.
class Session final : public ObjectClient {
 public:
  /// Validates the region header and connects, retrying refused connects
  /// within the budget. Throws AttachError.
  static std::unique_ptr<Session> attach(const net::Endpoint& control,
                                         const std::filesystem::path& region_path,
                                         const AttachOptions& opts = {});
  ~Session() override;

  /// Blocks for the next INVOKE; nullopt once the backend closes the channel.
  std::optional<proto::InvokeMsg> next_invocation();

  ObjectBody get_object(const ObjectRef& ref) override;
  /// Uses the session's default write mode (see set_async_puts).
  std::uint64_t put_object(const ObjectRef& ref, ByteSpan data) override;
  std::uint64_t put_object(const ObjectRef& ref, ByteSpan data, bool async);
  CopyCounters counters() const override { return counters_; }

  /// Sends FN_RESPONSE and invalidates all views. Throws IllegalState when
  /// no invocation is active.
  void respond(proto::Status status, ByteSpan payload, std::string error = {});

  void set_async_puts(bool on) noexcept { async_puts_ = on; }
  bool active() const noexcept { return active_.has_value(); }
  const shmem::MappedRegion& region() const noexcept { return region_; }

 private:
  class RingBody;
  friend class RingBody;

  Session(net::Endpoint ep, AttachOptions opts, net::Stream control, shmem::MappedRegion region);
  ObjectBody get_once(const ObjectRef& ref);
  bool reconnect();
  void require_active(const char* op) const;
  proto::Frame expect(proto::MessageType type);
  void send(proto::MessageType type, const Bytes& body);
  void finish_stream();
  std::uint64_t put_via_ring(std::uint64_t id, const ObjectRef& ref, ByteSpan data, bool async);

  net::Endpoint control_ep_;
  AttachOptions opts_;
  net::Stream control_;
  shmem::MappedRegion region_;
  shmem::RingView ring_;
  std::optional<Id128> active_;
  std::uint64_t next_request_id_ = 1;
  std::shared_ptr<std::uint64_t> epoch_ = std::make_shared<std::uint64_t>(1);
  bool async_puts_ = false;
  RingBody* open_stream_ = nullptr;
  CopyCounters counters_;
};

}  // namespace nexus::frontend
