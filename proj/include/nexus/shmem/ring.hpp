// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>

#include "nexus/common/bytes.hpp"

namespace nexus::shmem {

/// Single-producer/single-consumer byte ring living in shared memory.
///
/// Layout at the ring area (see PROTOCOL.md):
///   +0   u64 capacity (power of two)
///   +8   u64 tail, free-running, advanced only by the producer
///   +64  u64 head, free-running, advanced only by the consumer
///   +128 data[capacity]
///
/// The producer publishes tail with release after copying in, and reads head
/// with acquire; the consumer mirrors this. Both counters only grow, so
/// tail - head is the fill level and full/empty are never ambiguous.
class RingView {
 public:
  RingView() = default;
  /// Binds to an initialized ring area.
  explicit RingView(std::byte* area) noexcept;

  /// Writes capacity and zeroes both counters. Only the region creator calls
  /// this, before any peer attaches.
  static void initialize(std::byte* area, std::uint64_t capacity) noexcept;

  bool valid() const noexcept { return area_ != nullptr; }
  std::uint64_t capacity() const noexcept { return capacity_; }

  /// Producer side. Copies min(len, free space) bytes and publishes tail.
  std::uint64_t write(ByteSpan src) noexcept;
  /// Consumer side. Copies min(len, fill level) bytes out and publishes head.
  std::uint64_t read(MutableByteSpan dst) noexcept;
  Bytes read(std::uint64_t max);

  std::uint64_t head() const noexcept;
  std::uint64_t tail() const noexcept;
  /// tail - head as seen by an observer (acquire loads).
  std::uint64_t fill() const noexcept;
  bool empty() const noexcept { return fill() == 0; }

 private:
  std::uint64_t& head_word() const noexcept;
  std::uint64_t& tail_word() const noexcept;
  std::byte* data() const noexcept;

  std::byte* area_ = nullptr;
  std::uint64_t capacity_ = 0;
};

}  // namespace nexus::shmem
