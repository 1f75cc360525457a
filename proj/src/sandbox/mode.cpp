// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/sandbox/mode.hpp"

#include <string>

#include "nexus/common/error.hpp"

namespace nexus::sandbox {

std::string_view mode_name(Mode m) noexcept {
  switch (m) {
    case Mode::kCoupled:
      return "coupled";
    case Mode::kOffloaded:
      return "offloaded";
    case Mode::kOffloadedAsync:
      return "offloaded-async";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  if (name == "coupled") return Mode::kCoupled;
  if (name == "offloaded") return Mode::kOffloaded;
  if (name == "offloaded-async") return Mode::kOffloadedAsync;
  throw Error(Errc::kSchemaError, "mode: unknown mode '" + std::string(name) + "'");
}

}  // namespace nexus::sandbox
