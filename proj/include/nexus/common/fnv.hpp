// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "nexus/common/bytes.hpp"

namespace nexus {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// Incremental 64-bit FNV-1a; feeding chunks in order equals hashing the
/// concatenation.
class Fnv1a64 {
 public:
  void update(ByteSpan data) noexcept {
    for (std::byte b : data) {
      state_ ^= static_cast<std::uint8_t>(b);
      state_ *= kFnvPrime;
    }
  }
  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kFnvOffsetBasis;
};

inline std::uint64_t fnv1a64(ByteSpan data) noexcept {
  Fnv1a64 h;
  h.update(data);
  return h.digest();
}

}  // namespace nexus
