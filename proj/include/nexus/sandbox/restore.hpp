// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "nexus/sandbox/mode.hpp"

namespace nexus::sandbox {

/// Linear snapshot-restore cost: base + per_page * pages. Offloaded guests
/// carry no communication fabric, so their working set shrinks by
/// `offload_ws_reduction`.
struct RestoreModel {
  std::uint64_t base_us = 50'000;
  std::uint64_t per_page_us = 10;
  std::uint64_t working_set_pages_coupled = 10'000;
  double offload_ws_reduction = 0.31;

  /// Throws SchemaError unless 0 <= reduction < 1.
  void validate() const;
  std::uint64_t pages(Mode mode) const;
  std::uint64_t restore_us(Mode mode) const;
};

}  // namespace nexus::sandbox
