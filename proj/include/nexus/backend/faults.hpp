// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace nexus::backend {

enum class FaultPoint {
  kDuringPrefetch,         // a prefetch GET is on the wire, response not read
  kPostFnResponsePreAck,   // handler responded, its writes are not acknowledged
};

std::string_view fault_point_name(FaultPoint p) noexcept;
/// Accepts "during-prefetch" and "post-fn-response-pre-ack". Throws SchemaError.
FaultPoint parse_fault_point(std::string_view name);

/// Crash-only fault injection: when the armed point is reached for the
/// `nth` time the action runs. The default action is SIGKILL to self.
class FaultInjector {
 public:
  void arm(FaultPoint point, std::uint32_t nth = 1, std::function<void()> action = {});
  void disarm() noexcept { armed_ = false; }
  /// Returns true if the fault fired (only observable with a custom action).
  bool reached(FaultPoint point);
  bool armed_for(FaultPoint point) const noexcept { return armed_ && point_ == point; }

 private:
  std::atomic<bool> armed_{false};
  FaultPoint point_{};
  std::atomic<std::uint32_t> remaining_{0};
  std::function<void()> action_;
};

}  // namespace nexus::backend
