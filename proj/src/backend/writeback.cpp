// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/writeback.hpp"

#include <algorithm>

namespace nexus::backend {

void ResponseBuffer::add_pending() {
  std::lock_guard lock(mu_);
  ++pending_;
}

void ResponseBuffer::write_acked(std::uint64_t at_us) {
  std::unique_lock lock(mu_);
  if (pending_ > 0) --pending_;
  last_ack_us_ = std::max(last_ack_us_, at_us);
  if (held_ && pending_ == 0) release_locked(lock);
}

void ResponseBuffer::write_failed(const std::string& error) {
  std::unique_lock lock(mu_);
  if (pending_ > 0) --pending_;
  if (!failure_) failure_ = error;
  if (held_) release_locked(lock);
}

void ResponseBuffer::hold(proto::IngressResponse response) {
  std::unique_lock lock(mu_);
  if (outcome_ != Outcome::kHeld) return;
  held_ = std::move(response);
  if (pending_ == 0 || failure_) release_locked(lock);
}

void ResponseBuffer::fail_now(proto::IngressResponse response) {
  std::unique_lock lock(mu_);
  if (outcome_ != Outcome::kHeld) return;
  response.ok = false;
  held_ = std::move(response);
  release_locked(lock);
}

void ResponseBuffer::release_locked(std::unique_lock<std::mutex>& lock) {
  if (outcome_ != Outcome::kHeld || !held_) return;
  auto r = std::move(*held_);
  held_.reset();
  if (failure_) {
    r.ok = false;
    r.error = "write failed: " + *failure_;
    r.payload.clear();
  }
  r.timestamps_us.last_write_ack = last_ack_us_;
  outcome_ = r.ok ? Outcome::kReleasedOk : Outcome::kReleasedError;
  lock.unlock();
  // The sink runs outside the lock; it may write to a socket.
  sink_(r);
}

ResponseBuffer::Outcome ResponseBuffer::outcome() const {
  std::lock_guard lock(mu_);
  return outcome_;
}

std::uint32_t ResponseBuffer::pending() const {
  std::lock_guard lock(mu_);
  return pending_;
}

std::uint64_t ResponseBuffer::last_ack_us() const {
  std::lock_guard lock(mu_);
  return last_ack_us_;
}

}  // namespace nexus::backend
