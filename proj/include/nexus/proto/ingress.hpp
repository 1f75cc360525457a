// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "nexus/common/bytes.hpp"
#include "nexus/common/ids.hpp"

namespace nexus::proto {

/// Per-phase latency on the backend's monotonic clock.
struct Breakdown {
  std::uint64_t queue = 0;
  std::uint64_t restore = 0;
  std::uint64_t prefetch = 0;
  std::uint64_t exec = 0;
  std::uint64_t writeback = 0;
  std::uint64_t total = 0;

  friend bool operator==(const Breakdown&, const Breakdown&) = default;
};

/// Absolute monotonic timestamps (µs) of the invocation's milestones.
/// Zero means the milestone did not happen.
struct Milestones {
  std::uint64_t received = 0;
  std::uint64_t admitted = 0;
  std::uint64_t ready = 0;
  std::uint64_t invoke_sent = 0;
  std::uint64_t fn_response = 0;
  std::uint64_t last_write_ack = 0;
  std::uint64_t released = 0;

  friend bool operator==(const Milestones&, const Milestones&) = default;
};

struct IngressResponse {
  Id128 invocation_id;
  Id128 idempotency_key;
  bool ok = false;
  std::string error;
  Bytes payload;
  Breakdown breakdown_us;
  Milestones timestamps_us;
  std::uint64_t sandbox_id = 0;
  bool cold = false;

  friend bool operator==(const IngressResponse&, const IngressResponse&) = default;
};

std::string serialize_response(const IngressResponse& r);
/// Throws SchemaError on a malformed body.
IngressResponse parse_response(ByteSpan json);

}  // namespace nexus::proto
