// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace nexus::store {

// request  = [u32 LE length][u8 op][u16 bucket_len][bucket][u16 key_len][key][payload]
// response = [u32 LE length][u8 status][payload | u64 version]
// `length` counts every byte after the length field.

enum class StoreOp : std::uint8_t { kGet = 1, kPut = 2, kHead = 3 };

enum class StoreStatus : std::uint8_t {
  kOk = 0,
  kNotFound = 1,
  kInjectedFailure = 2,
  kBadRequest = 3,
};

}  // namespace nexus::store
