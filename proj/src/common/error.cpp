// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/common/error.hpp"

namespace nexus {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kOversizeFrame: return "OversizeFrame";
    case Errc::kTruncatedFrame: return "TruncatedFrame";
    case Errc::kSchemaError: return "SchemaError";
    case Errc::kHintTooLarge: return "HintTooLarge";
    case Errc::kCapacityExceeded: return "CapacityExceeded";
    case Errc::kFilesystemError: return "FilesystemError";
    case Errc::kRegionFull: return "RegionFull";
    case Errc::kNotFound: return "NotFound";
    case Errc::kInjectedFailure: return "InjectedFailure";
    case Errc::kSpawnError: return "SpawnError";
    case Errc::kIllegalState: return "IllegalState";
    case Errc::kUnknownFunction: return "UnknownFunction";
    case Errc::kProvisionFailed: return "ProvisionFailed";
    case Errc::kPrefetchFailed: return "PrefetchFailed";
    case Errc::kAttachError: return "AttachError";
    case Errc::kTransportError: return "TransportError";
    case Errc::kHandlerError: return "HandlerError";
    case Errc::kStoreError: return "StoreError";
  }
  return "Unknown";
}

}  // namespace nexus
