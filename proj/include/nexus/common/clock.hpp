// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <thread>

namespace nexus {

using Clock = std::chrono::steady_clock;

/// Microseconds on the monotonic clock. steady_clock is CLOCK_MONOTONIC on
/// Linux, so values are comparable across processes on one host.
inline std::uint64_t now_us() noexcept {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now().time_since_epoch())
          .count());
}

inline void sleep_until_us(std::uint64_t deadline_us) {
  auto now = now_us();
  if (deadline_us > now) std::this_thread::sleep_for(std::chrono::microseconds(deadline_us - now));
}

/// Burns CPU for the given duration. Used for synthetic compute and for the
/// guest-side fabric cost of the coupled baseline.
inline void spin_for_us(std::uint64_t us) noexcept {
  auto end = now_us() + us;
  while (now_us() < end) {
  }
}

}  // namespace nexus
