// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "nexus/common/bytes.hpp"
#include "nexus/proto/frame.hpp"

namespace nexus::backend {

/// Backend counters. Dumped as JSON on SIGTERM and by the status query.
struct Metrics {
  std::atomic<std::uint64_t> invocations{0};
  std::atomic<std::uint64_t> responses_ok{0};
  std::atomic<std::uint64_t> responses_error{0};
  std::atomic<std::uint64_t> cold_starts{0};
  std::atomic<std::uint64_t> warm_starts{0};
  std::atomic<std::uint64_t> prefetches{0};
  std::atomic<std::uint64_t> prefetch_failures{0};
  std::atomic<std::uint64_t> prefetch_hits{0};  // GETs served from a prefetched slot
  std::atomic<std::uint64_t> hint_mismatches{0};
  std::atomic<std::uint64_t> sync_slot_gets{0};
  std::atomic<std::uint64_t> ring_gets{0};
  std::atomic<std::uint64_t> ring_puts{0};
  std::atomic<std::uint64_t> sync_puts{0};
  std::atomic<std::uint64_t> async_puts{0};
  std::atomic<std::uint64_t> write_retries{0};
  std::atomic<std::uint64_t> write_failures{0};
  std::atomic<std::uint64_t> store_gets{0};
  std::atomic<std::uint64_t> store_puts{0};
  std::atomic<std::uint64_t> slot_bytes_written{0};  // GET payload bytes placed in slots
  std::atomic<std::uint64_t> ring_bytes{0};
  std::atomic<std::uint64_t> checksum_failures{0};
  std::atomic<std::uint64_t> peak_ring_fill{0};
  std::atomic<std::uint64_t> peak_active{0};
  std::atomic<std::uint64_t> active{0};
  std::atomic<std::uint64_t> queued{0};

  std::string to_json() const;
  void raise_peak(std::atomic<std::uint64_t>& peak, std::uint64_t v) noexcept;
};

/// Records sandbox-scope frames in both directions for audits.
class FrameCapture {
 public:
  struct Entry {
    std::uint64_t sandbox_id = 0;
    bool to_sandbox = false;
    proto::MessageType type{};
    Bytes body;
  };

  void enable(bool on) noexcept { enabled_ = on; }
  bool enabled() const noexcept { return enabled_; }
  void record(std::uint64_t sandbox_id, bool to_sandbox, proto::MessageType type, ByteSpan body);
  std::vector<Entry> entries() const;
  std::size_t size() const;
  /// Number of captured frames whose encoded bytes contain `needle`.
  std::size_t count_containing(ByteSpan needle) const;
  void clear();

 private:
  std::atomic<bool> enabled_{false};
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

}  // namespace nexus::backend
