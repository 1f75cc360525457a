// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace nexus::sandbox {

/// How a sandbox reaches storage.
///   coupled          the guest carries its own store client (baseline)
///   offloaded        remoted GET/PUT, no prefetch, synchronous writes
///   offloaded-async  remoted with prefetch, async writes and early release
enum class Mode { kCoupled, kOffloaded, kOffloadedAsync };

std::string_view mode_name(Mode m) noexcept;
/// Throws SchemaError on an unknown name.
Mode parse_mode(std::string_view name);

inline bool is_offloaded(Mode m) noexcept { return m != Mode::kCoupled; }

}  // namespace nexus::sandbox
