// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "nexus/common/bytes.hpp"

namespace nexus {

std::string base64_encode(ByteSpan data);
/// Standard alphabet with padding; nullopt on malformed input.
std::optional<Bytes> base64_decode(std::string_view text);

}  // namespace nexus
