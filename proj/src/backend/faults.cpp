// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/faults.hpp"

#include <signal.h>
#include <unistd.h>

#include <string>

#include "nexus/common/error.hpp"

namespace nexus::backend {

std::string_view fault_point_name(FaultPoint p) noexcept {
  return p == FaultPoint::kDuringPrefetch ? "during-prefetch" : "post-fn-response-pre-ack";
}

FaultPoint parse_fault_point(std::string_view name) {
  if (name == "during-prefetch") return FaultPoint::kDuringPrefetch;
  if (name == "post-fn-response-pre-ack") return FaultPoint::kPostFnResponsePreAck;
  throw Error(Errc::kSchemaError, "kill point: unknown '" + std::string(name) + "'");
}

void FaultInjector::arm(FaultPoint point, std::uint32_t nth, std::function<void()> action) {
  point_ = point;
  remaining_ = nth == 0 ? 1 : nth;
  action_ = std::move(action);
  armed_ = true;
}

bool FaultInjector::reached(FaultPoint point) {
  if (!armed_ || point_ != point) return false;
  if (remaining_.fetch_sub(1) != 1) return false;
  armed_ = false;
  if (action_) {
    action_();
  } else {
    ::kill(::getpid(), SIGKILL);
  }
  return true;
}

}  // namespace nexus::backend
