// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace nexus {

/// 16 opaque bytes rendered as 32 lowercase hex digits. Used for invocation
/// ids and idempotency keys.
struct Id128 {
  std::array<std::uint8_t, 16> bytes{};

  bool is_zero() const noexcept;
  std::string hex() const;
  static std::optional<Id128> from_hex(std::string_view hex);
  /// Fresh random id; never all-zero.
  static Id128 random();

  friend bool operator==(const Id128&, const Id128&) = default;
  friend auto operator<=>(const Id128&, const Id128&) = default;
};

struct Id128Hash {
  std::size_t operator()(const Id128& id) const noexcept;
};

}  // namespace nexus
