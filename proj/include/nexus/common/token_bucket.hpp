// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <mutex>

namespace nexus {

/// Byte-granular token bucket with reservation semantics: a caller takes
/// its tokens immediately (possibly driving the balance negative) and then
/// sleeps until the debt is repaid. Waiters are therefore served in arrival
/// order and the long-run rate never exceeds `rate_bps`.
class TokenBucket {
 public:
  /// `burst_bytes` is the bucket depth. The bucket starts empty unless
  /// `start_full` is set.
  TokenBucket(std::uint64_t rate_bps, std::uint64_t burst_bytes, bool start_full = false);

  /// Blocks until `n_bytes` may be sent. Requests larger than the burst are
  /// split into burst-sized pieces. Zero returns immediately.
  void acquire(std::uint64_t n_bytes);
  /// Reserves without sleeping; returns the monotonic time (µs) at which the
  /// reservation is covered.
  std::uint64_t reserve(std::uint64_t n_bytes);

  std::uint64_t rate_bps() const noexcept { return rate_bps_; }
  std::uint64_t burst_bytes() const noexcept { return burst_bytes_; }

 private:
  std::mutex mu_;
  std::uint64_t rate_bps_;
  std::uint64_t burst_bytes_;
  double tokens_;  // bytes; negative while reservations are outstanding
  std::uint64_t last_us_;
};

}  // namespace nexus
