// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <thread>

namespace nexus {

/// Wait strategy for polling shared-memory counters: a few yields, then
/// sleeps that double up to a ceiling. Yielding first keeps hand-offs fast
/// when the peer is running; sleeping keeps a single core usable.
class Backoff {
 public:
  explicit Backoff(std::uint64_t max_sleep_us = 1000) noexcept : max_sleep_us_(max_sleep_us) {}

  void pause() {
    if (spins_ < kYields) {
      ++spins_;
      std::this_thread::yield();
      return;
    }
    std::this_thread::sleep_for(std::chrono::microseconds(sleep_us_));
    sleep_us_ = std::min(sleep_us_ * 2, max_sleep_us_);
  }
  void reset() noexcept {
    spins_ = 0;
    sleep_us_ = kFirstSleepUs;
  }

 private:
  static constexpr int kYields = 16;
  static constexpr std::uint64_t kFirstSleepUs = 20;
  std::uint64_t max_sleep_us_;
  int spins_ = 0;
  std::uint64_t sleep_us_ = kFirstSleepUs;
};

}  // namespace nexus
