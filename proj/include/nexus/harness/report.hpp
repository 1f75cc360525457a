// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nexus/frontend/object_client.hpp"
#include "nexus/proto/ingress.hpp"

namespace nexus::harness {

struct InvocationResult {
  std::size_t index = 0;
  std::string function;
  std::uint64_t t_ms = 0;
  bool hinted = false;
  bool ok = false;
  std::string error;
  std::uint32_t attempts = 0;
  bool cold = false;
  std::uint64_t sandbox_id = 0;
  proto::Breakdown breakdown;
  proto::Milestones milestones;
  // From the handler's report; zero when the invocation failed.
  std::uint64_t io_us = 0;
  std::uint64_t compute_us = 0;
  frontend::CopyCounters copies;
  std::uint32_t inputs = 0;
  std::uint32_t zero_copy_inputs = 0;
  std::uint32_t checksum_mismatches = 0;  // inputs whose bytes differ from the store
  bool has_output = false;
  std::uint64_t output_version = 0;
};

struct FunctionStats {
  std::string function;
  std::size_t count = 0;
  std::size_t errors = 0;
  double mean_us = 0;
  double p50_us = 0;
  double p99_us = 0;
  double unloaded_median_us = 0;  // 0 when not measured
  double slowdown = 0;            // p99 / unloaded median
};

/// Backend counters accumulated over a run.
struct RunCounters {
  std::uint64_t get_copies = 0;
  std::uint64_t slot_get_copies = 0;  // copies made on the shared-memory slot path
  std::uint64_t put_copies = 0;
  std::uint64_t puts = 0;
  std::uint64_t bytes_copied = 0;
  std::uint64_t store_gets = 0;
  std::uint64_t store_puts = 0;
  std::uint64_t hint_mismatches = 0;
  std::uint64_t prefetch_hits = 0;
  std::uint64_t ring_gets = 0;
  std::uint64_t ingress_retries = 0;
  std::uint64_t write_retries = 0;
  std::uint64_t errors = 0;
  std::uint64_t checksum_mismatches = 0;
};

struct RunReport {
  std::string mode;
  std::uint64_t duration_us = 0;
  std::vector<InvocationResult> invocations;
  std::vector<FunctionStats> functions;
  RunCounters counters;
  double mean_io_us = 0;          // over successful invocations
  double geo_mean_slowdown = 0;   // over functions with an unloaded median

  std::string to_json() const;
  /// One row per invocation, for plotting.
  std::string to_csv() const;
};

/// Nearest-rank percentile, p in (0, 100]. Empty input gives 0.
double percentile(std::vector<std::uint64_t> values, double p);
double median(std::vector<std::uint64_t> values);
/// Zero for an empty input.
double geometric_mean(const std::vector<double>& values);

/// Fills functions, counters, mean_io_us and geo_mean_slowdown from the
/// invocation list. `unloaded` maps function to its unloaded median.
void summarize(RunReport& report, const std::map<std::string, double>& unloaded);

}  // namespace nexus::harness
