// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/sandbox/restore.hpp"

#include <cmath>

#include "nexus/common/error.hpp"

namespace nexus::sandbox {

void RestoreModel::validate() const {
  if (!(offload_ws_reduction >= 0.0 && offload_ws_reduction < 1.0)) {
    throw Error(Errc::kSchemaError, "restore.offload_ws_reduction: must be in [0, 1)");
  }
}

std::uint64_t RestoreModel::pages(Mode mode) const {
  if (!is_offloaded(mode)) return working_set_pages_coupled;
  return static_cast<std::uint64_t>(
      std::llround(static_cast<double>(working_set_pages_coupled) * (1.0 - offload_ws_reduction)));
}

std::uint64_t RestoreModel::restore_us(Mode mode) const { return base_us + per_page_us * pages(mode); }

}  // namespace nexus::sandbox
