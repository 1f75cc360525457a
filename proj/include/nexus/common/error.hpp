// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nexus {

enum class Errc {
  kOversizeFrame,
  kTruncatedFrame,
  kSchemaError,
  kHintTooLarge,
  kCapacityExceeded,
  kFilesystemError,
  kRegionFull,
  kNotFound,
  kInjectedFailure,
  kSpawnError,
  kIllegalState,
  kUnknownFunction,
  kProvisionFailed,
  kPrefetchFailed,
  kAttachError,
  kTransportError,
  kHandlerError,
  kStoreError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace nexus
