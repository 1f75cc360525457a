// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "nexus/common/error.hpp"
#include "nexus/frontend/handler.hpp"
#include "nexus/harness/cluster.hpp"
#include "nexus/harness/replay.hpp"
#include "nexus/harness/report.hpp"
#include "nexus/harness/trace.hpp"

namespace nexus::harness {
namespace {

// ------------------------------------------------------------------ trace

TraceEvent sample_event() {
  return {12, "fn-a", {{{"in", "a"}, 100}, {{"in", "b"}, 200}}, 3000, SizedRef{{"out", "x"}, 50}, true};
}

TEST(Trace, EventRoundTrip) {
  auto ev = sample_event();
  EXPECT_EQ(parse_event(as_bytes(serialize_event(ev))), ev);
  ev.output.reset();
  ev.hinted = false;
  EXPECT_EQ(parse_event(as_bytes(serialize_event(ev))), ev);
}

TEST(Trace, ParseReportsLineAndOrder) {
  auto a = sample_event();
  auto b = sample_event();
  b.t_ms = 5;
  std::string text = serialize_event(a) + "\n" + serialize_event(b) + "\n";
  try {
    parse_trace(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  try {
    parse_trace(serialize_event(a) + "\n{broken\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  // Blank lines are tolerated.
  EXPECT_EQ(parse_trace("\n" + serialize_event(b) + "\n\n" + serialize_event(a)).size(), 2u);
  EXPECT_TRUE(parse_trace("").empty());
}

TEST(Trace, SerializeTraceRoundTrips) {
  GenOptions g;
  g.count = 50;
  auto t = generate_trace(g);
  EXPECT_EQ(parse_trace(serialize_trace(t)), t);
}

TEST(Trace, HintedEventsCarryHintsAndSizes) {
  auto ev = sample_event();
  auto env = promote_hints(ev);
  EXPECT_EQ(env.function, "fn-a");
  ASSERT_EQ(env.input_hints.size(), 2u);
  EXPECT_EQ(env.input_hints[0].ref, (proto::ObjectRef{"in", "a"}));
  EXPECT_EQ(env.input_hints[0].size_bytes, 100u);
  EXPECT_EQ(env.input_hints[1].size_bytes, 200u);
  ASSERT_EQ(env.output_hints.size(), 1u);

  ev.hinted = false;
  auto opaque = promote_hints(ev);
  EXPECT_TRUE(opaque.opaque_inputs());
  EXPECT_TRUE(opaque.output_hints.empty());
  // The handler sees the same work either way.
  auto h1 = frontend::parse_handler_event(env.event_body);
  auto h2 = frontend::parse_handler_event(opaque.event_body);
  EXPECT_EQ(h1.inputs, h2.inputs);
  EXPECT_EQ(h1.compute_us, h2.compute_us);
  EXPECT_EQ(h1.inputs.size(), 2u);

  auto from_json = promote_hints(as_bytes(serialize_event(sample_event())));
  EXPECT_EQ(from_json.input_hints, env.input_hints);
}

TEST(Trace, InputObjectsRejectConflictingSizes) {
  auto a = sample_event();
  auto b = sample_event();
  b.t_ms = 20;
  auto objs = input_objects({a, b});
  EXPECT_EQ(objs.size(), 2u);
  EXPECT_EQ(objs.at({"in", "b"}), 200u);
  b.inputs[0].size = 101;
  EXPECT_THROW(input_objects({a, b}), Error);
}

// -------------------------------------------------------------- generator

TEST(Generator, DeterministicPerSeed) {
  GenOptions g;
  g.count = 200;
  EXPECT_EQ(generate_trace(g), generate_trace(g));
  auto other = g;
  other.seed = 2;
  EXPECT_NE(generate_trace(g), generate_trace(other));
}

TEST(Generator, SortedNamedAndBounded) {
  GenOptions g;
  g.functions = 3;
  g.duration_ms = 2000;
  g.rate_per_s = 50;
  auto t = generate_trace(g);
  ASSERT_FALSE(t.empty());
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end(), [](auto& x, auto& y) { return x.t_ms < y.t_ms; }));
  EXPECT_LT(t.back().t_ms, 2000u);
  for (auto& ev : t) {
    EXPECT_TRUE(ev.function == "fn-000" || ev.function == "fn-001" || ev.function == "fn-002");
    EXPECT_EQ(ev.inputs.size(), 1u);
  }
  EXPECT_EQ(function_name(7), "fn-007");
  // Poisson count over 2 s at 50/s: mean 100, sd 10.
  EXPECT_NEAR(static_cast<double>(t.size()), 100.0, 40.0);
  EXPECT_NO_THROW(input_objects(t));
}

TEST(Generator, HintedShareMatchesTarget) {
  GenOptions g;
  g.count = 20'000;
  auto t = generate_trace(g);
  ASSERT_EQ(t.size(), 20'000u);
  auto hinted = std::count_if(t.begin(), t.end(), [](auto& e) { return e.hinted; });
  const double share = static_cast<double>(hinted) / t.size();
  // Binomial sd at n=20000, p=0.96 is about 0.0014; allow 4 sd.
  EXPECT_NEAR(share, 0.96, 0.0056);
}

TEST(Generator, IoRatioScalesInputSize) {
  GenOptions lo, hi;
  lo.count = hi.count = 400;
  lo.io_ratio = 0.1;
  hi.io_ratio = 0.9;
  auto mean_in = [](const Trace& t) {
    double s = 0;
    for (auto& e : t) s += static_cast<double>(e.inputs[0].size);
    return s / t.size();
  };
  auto mean_compute = [](const Trace& t) {
    double s = 0;
    for (auto& e : t) s += static_cast<double>(e.compute_us);
    return s / t.size();
  };
  auto a = generate_trace(lo), b = generate_trace(hi);
  EXPECT_GT(mean_in(b), 5 * mean_in(a));
  EXPECT_LT(mean_compute(b), mean_compute(a));
}

// ----------------------------------------------------------------- report

// Nearest-rank oracle: the smallest value with at least p% of samples at or
// below it.
double oracle_percentile(std::vector<std::uint64_t> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  for (auto x : v) {
    auto at_or_below = std::count_if(v.begin(), v.end(), [&](auto y) { return y <= x; });
    if (100.0 * at_or_below >= p * v.size()) return static_cast<double>(x);
  }
  return static_cast<double>(v.back());
}

TEST(Report, PercentileMatchesOracle) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::uint64_t> v(1 + rng() % 60);
    for (auto& x : v) x = rng() % 1000;
    for (double p : {1.0, 25.0, 50.0, 90.0, 99.0, 100.0}) {
      ASSERT_EQ(percentile(v, p), oracle_percentile(v, p)) << "n=" << v.size() << " p=" << p;
    }
  }
  EXPECT_EQ(percentile({}, 50), 0);
  EXPECT_EQ(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 99), 10);
}

TEST(Report, GeometricMean) {
  EXPECT_EQ(geometric_mean({}), 0);
  EXPECT_NEAR(geometric_mean({2, 8}), 4.0, 1e-12);
  EXPECT_NEAR(geometric_mean({1, 10, 100}), 10.0, 1e-9);
  std::mt19937 rng(5);
  std::vector<double> v;
  double log_sum = 0;
  for (int i = 0; i < 100; ++i) {
    v.push_back(1.0 + rng() % 100);
    log_sum += std::log(v.back());
  }
  EXPECT_NEAR(geometric_mean(v), std::exp(log_sum / v.size()), 1e-9);
}

InvocationResult result(const std::string& fn, bool ok, std::uint64_t total, std::uint64_t io) {
  InvocationResult r;
  r.function = fn;
  r.ok = ok;
  r.breakdown.total = total;
  r.io_us = ok ? io : 0;
  return r;
}

TEST(Report, SummarizeComputesSlowdowns) {
  RunReport rep;
  for (std::uint64_t i = 1; i <= 10; ++i) rep.invocations.push_back(result("a", true, i * 100, 10));
  rep.invocations.push_back(result("b", true, 400, 30));
  rep.invocations.push_back(result("b", false, 0, 0));
  summarize(rep, {{"a", 100.0}, {"b", 200.0}});
  ASSERT_EQ(rep.functions.size(), 2u);
  auto& a = rep.functions[0];
  EXPECT_EQ(a.function, "a");
  EXPECT_EQ(a.count, 10u);
  EXPECT_EQ(a.p99_us, 1000);
  EXPECT_EQ(a.slowdown, 10.0);
  auto& b = rep.functions[1];
  EXPECT_EQ(b.errors, 1u);
  EXPECT_EQ(b.slowdown, 2.0);
  EXPECT_NEAR(rep.geo_mean_slowdown, std::sqrt(20.0), 1e-9);
  EXPECT_NEAR(rep.mean_io_us, (10 * 10 + 30) / 11.0, 1e-9);
  EXPECT_EQ(rep.counters.errors, 1u);
  auto j = nlohmann::json::parse(rep.to_json());
  EXPECT_EQ(j["functions"].size(), 2u);
  EXPECT_NE(rep.to_csv().find('\n'), std::string::npos);
}

TEST(Report, FunctionWithNoSuccessIsInfinitelySlow) {
  RunReport rep;
  rep.invocations.push_back(result("a", false, 0, 0));
  summarize(rep, {{"a", 100.0}});
  EXPECT_TRUE(std::isinf(rep.functions[0].slowdown));
  EXPECT_TRUE(std::isinf(rep.geo_mean_slowdown));
  EXPECT_NO_THROW(nlohmann::json::parse(rep.to_json()));
}

TEST(Report, EmptyRunIsEmpty) {
  RunReport rep;
  summarize(rep, {});
  EXPECT_TRUE(rep.functions.empty());
  EXPECT_EQ(rep.mean_io_us, 0);
  EXPECT_EQ(rep.geo_mean_slowdown, 0);
}

// --------------------------------------------------------- end to end runs

backend::BackendConfig small_backend(sandbox::Mode mode) {
  backend::BackendConfig c;
  c.mode = mode;
  c.sandbox_binary = NEXUS_SANDBOX_BIN;
  c.region_cap_bytes = 64 << 20;
  c.ring_capacity_bytes = 1 << 20;
  c.default_restore = {5'000, 0, 0, 0.31};
  return c;
}

void register_trace_functions(backend::BackendConfig& c, const Trace& t) {
  std::set<std::string> names;
  for (auto& ev : t) names.insert(ev.function);
  for (auto& n : names) {
    backend::FunctionConfig f;
    f.name = n;
    f.credentials_token = "tok-" + n;
    f.restore = c.default_restore;
    c.functions.push_back(f);
  }
}

TEST(Replay, EmptyTraceGivesEmptyReport) {
  ClusterOptions o;
  o.backend = small_backend(sandbox::Mode::kOffloadedAsync);
  Cluster cluster(o);
  auto rep = replay(cluster, {});
  EXPECT_TRUE(rep.invocations.empty());
  EXPECT_TRUE(rep.functions.empty());
}

TEST(Replay, EveryEventGetsOneVerifiedOutcome) {
  GenOptions g;
  g.functions = 2;
  g.count = 12;
  g.rate_per_s = 40;
  g.service_us = 4000;
  auto trace = generate_trace(g);
  for (auto mode : {sandbox::Mode::kCoupled, sandbox::Mode::kOffloadedAsync}) {
    ClusterOptions o;
    o.backend = small_backend(mode);
    register_trace_functions(o.backend, trace);
    Cluster cluster(o);
    auto rep = replay(cluster, trace);
    ASSERT_EQ(rep.invocations.size(), trace.size());
    for (auto& r : rep.invocations) {
      EXPECT_TRUE(r.ok) << r.error;
      EXPECT_EQ(r.checksum_mismatches, 0u);
      EXPECT_EQ(r.inputs, 1u);
      EXPECT_GE(r.breakdown.total, r.compute_us);
    }
    EXPECT_EQ(rep.mode, std::string(sandbox::mode_name(mode)));
    EXPECT_EQ(rep.counters.checksum_mismatches, 0u);
    if (mode == sandbox::Mode::kOffloadedAsync) EXPECT_EQ(rep.counters.slot_get_copies, 0u);
  }
}

TEST(Replay, UnloadedMedianPerFunction) {
  GenOptions g;
  g.functions = 2;
  g.count = 6;
  g.service_us = 3000;
  auto trace = generate_trace(g);
  ClusterOptions o;
  o.backend = small_backend(sandbox::Mode::kOffloaded);
  register_trace_functions(o.backend, trace);
  Cluster cluster(o);
  cluster.seed(input_objects(trace));
  auto med = measure_unloaded(cluster, trace, 3);
  std::set<std::string> names;
  for (auto& ev : trace) names.insert(ev.function);
  EXPECT_EQ(med.size(), names.size());
  for (auto& [fn, v] : med) EXPECT_GT(v, 0) << fn;
}

TEST(Sweep, InfiniteSloRunsToTheMaximum) {
  SweepTemplate t;
  t.rate_per_function = 4;
  t.start = 1;
  t.step = 1;
  t.max_functions = 2;
  t.unloaded_runs = 1;
  t.prewarm = 1;
  t.gen.duration_ms = 400;
  t.gen.service_us = 2000;
  t.backend = small_backend(sandbox::Mode::kOffloadedAsync);
  t.function.restore = {2'000, 0, 0, 0.31};
  auto r = density_sweep(t, sandbox::Mode::kOffloadedAsync, std::numeric_limits<double>::infinity());
  ASSERT_EQ(r.steps.size(), 2u);
  EXPECT_EQ(r.density, 2u);
  for (auto& s : r.steps) EXPECT_TRUE(s.passed);
  EXPECT_NO_THROW(nlohmann::json::parse(r.to_json()));
}

TEST(Sweep, TemplateParsing) {
  auto t = parse_sweep_template(R"({"rate_per_function": 3, "start": 2, "step": 2, "max_functions": 6,
    "node_memory_bytes": 1000000, "prewarm": 1, "function": {"name": "x", "restore": {"base_us": 7}}})");
  EXPECT_EQ(t.rate_per_function, 3);
  EXPECT_EQ(t.start, 2u);
  EXPECT_EQ(t.max_functions, 6u);
  EXPECT_EQ(t.node_memory_bytes, 1'000'000u);
  EXPECT_EQ(t.prewarm, 1u);
  EXPECT_EQ(t.function.restore.base_us, 7u);
  EXPECT_THROW(parse_sweep_template(R"({"step": 0})"), Error);
  EXPECT_THROW(parse_sweep_template("[1]"), Error);
}

TEST(Faults, SmallCampaignLosesNothing) {
  FaultCampaignOptions o;
  o.runs = 2;
  o.events_per_run = 4;
  o.max_kills = 1;
  o.backend = small_backend(sandbox::Mode::kOffloadedAsync);
  o.backend_binary = NEXUS_BACKEND_BIN;
  auto rep = run_fault_campaign(o);
  ASSERT_EQ(rep.runs.size(), 2u);
  EXPECT_EQ(rep.total(&FaultRunResult::events), 8u);
  EXPECT_EQ(rep.total(&FaultRunResult::lost), 0u);
  EXPECT_EQ(rep.total(&FaultRunResult::doubled), 0u);
  EXPECT_EQ(rep.total(&FaultRunResult::missing_objects), 0u);
  // Duplicate versions are allowed (at-least-once) but can only come from
  // retries.
  EXPECT_LE(rep.total(&FaultRunResult::duplicate_writes), rep.total(&FaultRunResult::retries));
  EXPECT_EQ(rep.total(&FaultRunResult::ok) + rep.total(&FaultRunResult::errors), 8u);
  for (auto& r : rep.runs) EXPECT_GE(r.restarts, 1u);
}

}  // namespace
}  // namespace nexus::harness
