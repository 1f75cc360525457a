// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/sandbox/lifecycle.hpp"

#include <fmt/format.h>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"

namespace nexus::sandbox {

std::string_view state_name(State s) noexcept {
  switch (s) {
    case State::kRestoring:
      return "Restoring";
    case State::kReady:
      return "Ready";
    case State::kBusy:
      return "Busy";
    case State::kDraining:
      return "Draining";
    case State::kReleased:
      return "Released";
  }
  return "?";
}

bool is_legal(State from, State to) noexcept {
  switch (from) {
    case State::kRestoring:
      return to == State::kReady || to == State::kDraining;
    case State::kReady:
      return to == State::kBusy || to == State::kDraining;
    case State::kBusy:
      return to == State::kReady || to == State::kDraining;
    case State::kDraining:
      return to == State::kReleased;
    case State::kReleased:
      return false;
  }
  return false;
}

Lifecycle::Lifecycle(std::uint64_t sandbox_id, TransitionObserver observer)
    : id_(sandbox_id), observer_(std::move(observer)) {
  history_.push_back({id_, State::kRestoring, State::kRestoring, now_us()});
}

State Lifecycle::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

void Lifecycle::apply(State next) {
  Transition t{id_, state_, next, now_us()};
  state_ = next;
  history_.push_back(t);
  if (observer_) observer_(t);
}

void Lifecycle::to(State next) {
  std::lock_guard lock(mu_);
  if (!is_legal(state_, next)) {
    throw Error(Errc::kIllegalState, fmt::format("sandbox {}: {} -> {} is not a legal transition", id_,
                                                 state_name(state_), state_name(next)));
  }
  apply(next);
}

bool Lifecycle::advance(State expected, State next) {
  std::lock_guard lock(mu_);
  if (state_ != expected || !is_legal(state_, next)) return false;
  apply(next);
  return true;
}

std::vector<Transition> Lifecycle::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::uint64_t Lifecycle::entered_at(State s) const {
  std::lock_guard lock(mu_);
  for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
    if (it->to == s) return it->at_us;
  }
  return 0;
}

}  // namespace nexus::sandbox
