// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nexus/common/bytes.hpp"
#include "nexus/proto/envelope.hpp"

namespace nexus::harness {

using proto::ObjectRef;

struct SizedRef {
  ObjectRef ref;
  std::uint64_t size = 0;

  friend bool operator==(const SizedRef&, const SizedRef&) = default;
};

/// One line of a JSON-lines trace.
struct TraceEvent {
  std::uint64_t t_ms = 0;  // offset from run start
  std::string function;
  std::vector<SizedRef> inputs;
  std::uint64_t compute_us = 0;
  std::optional<SizedRef> output;
  bool hinted = true;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

std::string serialize_event(const TraceEvent& ev);
/// Throws SchemaError.
TraceEvent parse_event(ByteSpan json);

/// Throws SchemaError on a malformed line or when events are not sorted by
/// t_ms.
Trace parse_trace(std::string_view jsonl);
Trace load_trace(const std::filesystem::path& path);
std::string serialize_trace(const Trace& trace);

/// The ingress step: lifts inputs and sizes into hints when the event is
/// hinted, strips them otherwise. The handler sees the same event body
/// either way. Throws SchemaError.
proto::InvocationEnvelope promote_hints(ByteSpan event_json);
proto::InvocationEnvelope promote_hints(const TraceEvent& ev);

/// Every input object the trace reads, with its size. Throws SchemaError if
/// one ref appears with two sizes.
std::map<ObjectRef, std::uint64_t> input_objects(const Trace& trace);

/// Seeded synthetic workload. Arrivals are Poisson; each function has a fixed
/// profile so its latency distribution is stable across a run.
struct GenOptions {
  std::uint32_t functions = 4;
  double rate_per_s = 20.0;  // aggregate arrival rate
  std::uint64_t duration_ms = 5000;
  std::optional<std::uint32_t> count;  // stop after this many events instead
  /// Share of the nominal service time spent moving bytes.
  double io_ratio = 0.5;
  std::uint64_t service_us = 20'000;
  /// Converts the I/O share into object sizes.
  std::uint64_t ref_bandwidth_bps = 600'000'000;
  double hinted_fraction = 0.96;
  double output_fraction = 0.25;  // output size relative to input size
  std::uint32_t objects_per_function = 4;
  std::uint64_t seed = 1;
};

Trace generate_trace(const GenOptions& opt);

/// Function names used by the generator: fn-000, fn-001, ...
std::string function_name(std::uint32_t index);

}  // namespace nexus::harness
