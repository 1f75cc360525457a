// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string_view>
#include <vector>

namespace nexus::sandbox {

enum class State { kRestoring, kReady, kBusy, kDraining, kReleased };

std::string_view state_name(State s) noexcept;

/// Restoring->Ready->Busy->{Ready|Draining}->Released. A sandbox that fails
/// to restore, or is evicted while idle, drains directly.
bool is_legal(State from, State to) noexcept;

struct Transition {
  std::uint64_t sandbox_id = 0;
  State from{};
  State to{};
  std::uint64_t at_us = 0;
};

using TransitionObserver = std::function<void(const Transition&)>;

/// Per-sandbox state machine; transitions are serialized and logged.
class Lifecycle {
 public:
  Lifecycle(std::uint64_t sandbox_id, TransitionObserver observer = {});

  State state() const;
  /// Throws IllegalState on a transition outside the legal set.
  void to(State next);
  /// Like to() but moves only from `expected`; returns false otherwise.
  bool advance(State expected, State next);
  std::vector<Transition> history() const;
  std::uint64_t entered_at(State s) const;

 private:
  void apply(State next);

  std::uint64_t id_;
  TransitionObserver observer_;
  mutable std::mutex mu_;
  State state_ = State::kRestoring;
  std::vector<Transition> history_;
};

}  // namespace nexus::sandbox
