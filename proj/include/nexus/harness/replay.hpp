// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nexus/harness/cluster.hpp"
#include "nexus/harness/report.hpp"
#include "nexus/harness/trace.hpp"

namespace nexus::harness {

struct ReplayOptions {
  RetryPolicy retry;
  /// Per-function unloaded medians used for slowdown; may be empty.
  std::map<std::string, double> unloaded;
  std::string mode_label;  // defaults to the cluster's mode
};

/// Issues every event at its offset without waiting for earlier ones,
/// collects one response per event and assembles the report after
/// quiescence. Seeds any input object the store lacks. Per-invocation
/// errors are recorded and the replay continues.
RunReport replay(Cluster& cluster, const Trace& trace, const ReplayOptions& opt = {});

/// Warm single-invocation phase: for each function in the trace, runs its
/// first event `runs + 1` times back to back, discards the first response
/// and returns the median total latency.
std::map<std::string, double> measure_unloaded(Cluster& cluster, const Trace& trace, std::uint32_t runs = 5);

/// Fills each function's warm pool: `concurrency` simultaneous invocations
/// of its first event.
void prewarm(Cluster& cluster, const Trace& trace, std::uint32_t concurrency);

/// Template for a density sweep. Each step deploys `functions` functions
/// at `rate_per_function` events/s each and replays `duration_ms` of load.
struct SweepTemplate {
  GenOptions gen;
  double rate_per_function = 2.0;
  std::uint32_t start = 1;
  std::uint32_t step = 1;
  std::uint32_t max_functions = 8;
  /// When non-zero, node capacity is this much memory divided by a
  /// sandbox's working set in the swept mode.
  std::uint64_t node_memory_bytes = 0;
  std::uint32_t unloaded_runs = 5;
  /// Concurrent invocations per function before each measured step, so
  /// the loaded phase starts from a warm pool like a steady-state node.
  std::uint32_t prewarm = 2;
  store::StoreProfile store;
  backend::BackendConfig backend;  // functions are generated per step
  backend::FunctionConfig function;  // profile shared by every function
};

/// Throws SchemaError.
SweepTemplate parse_sweep_template(std::string_view json_text);

struct SweepStep {
  std::uint32_t functions = 0;
  double geo_mean_slowdown = 0;
  std::size_t invocations = 0;
  std::size_t errors = 0;
  bool passed = false;
};

struct SweepResult {
  sandbox::Mode mode{};
  std::size_t capacity = 0;  // concurrent sandboxes admitted
  std::uint32_t density = 0;  // last passing function count; 0 if none passed
  std::vector<SweepStep> steps;

  std::string to_json() const;
};

/// Raises the deployed-function count until the geometric-mean slowdown
/// exceeds `slo`; returns the last passing count.
SweepResult density_sweep(const SweepTemplate& tmpl, sandbox::Mode mode,
                          double slo = 5.0);

struct FaultCampaignOptions {
  std::uint32_t runs = 20;
  std::uint64_t seed = 7;
  std::uint32_t events_per_run = 6;
  std::uint32_t max_kills = 2;
  std::uint64_t event_gap_ms = 15;
  std::uint64_t input_size = 256 * 1024;
  std::uint64_t output_size = 64 * 1024;
  backend::BackendConfig backend;
  store::StoreProfile store;
  std::string backend_binary;
  RetryPolicy retry;
};

struct FaultRunResult {
  std::uint32_t run = 0;
  std::vector<FaultSpec> plan;
  std::uint32_t restarts = 0;
  std::size_t events = 0;
  std::size_t ok = 0;
  std::size_t errors = 0;        // caller-visible error outcomes
  std::size_t lost = 0;          // events with no outcome
  std::size_t doubled = 0;       // events with more than one outcome
  std::size_t missing_objects = 0;  // acknowledged outputs absent or corrupt
  std::size_t duplicate_writes = 0;  // outputs stored more than once
  std::size_t extra_gets = 0;    // store GETs beyond one per input read
  std::size_t retries = 0;
};

struct FaultCampaignReport {
  std::vector<FaultRunResult> runs;

  std::size_t total(std::size_t FaultRunResult::*field) const;
  std::string to_json() const;
};

/// Randomized crash-only runs under a supervised backend: each run kills
/// the backend at the planned points while a small trace is replayed and
/// then audits outcomes and store contents.
FaultCampaignReport run_fault_campaign(const FaultCampaignOptions& opt);

}  // namespace nexus::harness
