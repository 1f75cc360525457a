// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nexus/frontend/object_client.hpp"

namespace nexus::frontend {

struct OutputSpec {
  ObjectRef ref;
  std::uint64_t size = 0;
};

/// Event body understood by the synthetic handler.
struct HandlerEvent {
  std::vector<ObjectRef> inputs;
  std::uint64_t compute_us = 0;
  std::optional<OutputSpec> output;
  bool fail = false;
};

/// Throws SchemaError.
HandlerEvent parse_handler_event(ByteSpan json);
std::string serialize_handler_event(const HandlerEvent& ev);

/// Deterministic object content for a ref, so retried invocations write
/// identical bytes.
Bytes synthetic_payload(const ObjectRef& ref, std::uint64_t size);

struct InputReport {
  ObjectRef ref;
  std::uint64_t size = 0;
  std::uint64_t checksum = 0;
  bool zero_copy = false;  // consumed straight from shared memory
};

struct HandlerReport {
  std::vector<InputReport> inputs;
  std::optional<OutputSpec> output;
  std::uint64_t output_checksum = 0;
  std::uint64_t output_version = 0;  // 0 when delegated
  std::uint64_t compute_us = 0;
  std::uint64_t io_us = 0;  // wall time inside SDK calls
  CopyCounters copies;      // counters accumulated during this invocation
};

std::string serialize_report(const HandlerReport& r);
/// Throws SchemaError.
HandlerReport parse_report(ByteSpan json);

/// GET every input, spin for compute_us, PUT the output. Throws
/// HandlerError when the event asks to fail.
HandlerReport run_synthetic_handler(ObjectClient& client, const HandlerEvent& ev);

}  // namespace nexus::frontend
