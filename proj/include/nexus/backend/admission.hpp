// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>

namespace nexus::backend {

/// Node capacity: a FIFO counting semaphore over active (Restoring or
/// Busy) sandboxes. Waiters are admitted strictly in arrival order.
class Admission {
 public:
  explicit Admission(std::size_t capacity) : capacity_(capacity) {}

  void acquire() {
    std::unique_lock lock(mu_);
    const auto ticket = next_ticket_++;
    cv_.wait(lock, [&] { return ticket == serving_ && active_ < capacity_; });
    ++serving_;
    ++active_;
    cv_.notify_all();
  }
  void release() {
    std::lock_guard lock(mu_);
    --active_;
    cv_.notify_all();
  }
  void set_capacity(std::size_t c) {
    std::lock_guard lock(mu_);
    capacity_ = c;
    cv_.notify_all();
  }
  std::size_t active() const {
    std::lock_guard lock(mu_);
    return active_;
  }
  std::size_t waiting() const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(next_ticket_ - serving_);
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t capacity_;
  std::size_t active_ = 0;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

}  // namespace nexus::backend
