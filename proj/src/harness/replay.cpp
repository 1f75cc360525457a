// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/harness/replay.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <random>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/common/fnv.hpp"
#include "nexus/common/task_set.hpp"
#include "nexus/frontend/handler.hpp"

namespace nexus::harness {

using json = nlohmann::json;

namespace {

std::map<std::string, std::uint64_t> backend_metrics(const Cluster& cluster) {
  std::map<std::string, std::uint64_t> out;
  try {
    auto j = json::parse(cluster.client().status());
    for (auto& [k, v] : j.at("metrics").items()) {
      if (v.is_number_unsigned()) out[k] = v.get<std::uint64_t>();
    }
  } catch (const std::exception& e) {
    spdlog::warn("status query failed: {}", e.what());
  }
  return out;
}

std::uint64_t delta(std::map<std::string, std::uint64_t>& before, std::map<std::string, std::uint64_t>& after,
                    const std::string& key) {
  auto a = after[key], b = before[key];
  // A restarted backend starts its counters from zero.
  return a >= b ? a - b : a;
}

InvocationResult to_result(const TraceEvent& ev, std::size_t index, const InvokeOutcome& out,
                           const std::map<ObjectRef, std::uint64_t>& checksums) {
  InvocationResult r;
  r.index = index;
  r.function = ev.function;
  r.t_ms = ev.t_ms;
  r.hinted = ev.hinted;
  r.attempts = out.attempts;
  auto& resp = out.response;
  r.ok = resp.ok;
  r.error = resp.error;
  r.cold = resp.cold;
  r.sandbox_id = resp.sandbox_id;
  r.breakdown = resp.breakdown_us;
  r.milestones = resp.timestamps_us;
  r.has_output = ev.output.has_value();
  if (!resp.ok) return r;
  try {
    auto rep = frontend::parse_report(resp.payload);
    r.io_us = rep.io_us;
    r.compute_us = rep.compute_us;
    r.copies = rep.copies;
    r.output_version = rep.output_version;
    for (auto& in : rep.inputs) {
      r.inputs++;
      if (in.zero_copy) r.zero_copy_inputs++;
      auto it = checksums.find(in.ref);
      if (it == checksums.end() || it->second != in.checksum) r.checksum_mismatches++;
    }
  } catch (const Error& e) {
    r.ok = false;
    r.error = std::string("unreadable handler report: ") + e.what();
  }
  return r;
}

std::map<ObjectRef, std::uint64_t> seed_and_checksum(Cluster& cluster, const Trace& trace) {
  std::map<ObjectRef, std::uint64_t> sums;
  for (auto& [ref, size] : input_objects(trace)) {
    auto obj = cluster.store().objects().get(ref);
    if (!obj || obj->data.size() != size) {
      auto data = frontend::synthetic_payload(ref, size);
      sums[ref] = fnv1a64(data);
      cluster.store().objects().put(ref, std::move(data));
    } else {
      sums[ref] = fnv1a64(obj->data);
    }
  }
  return sums;
}

}  // namespace

RunReport replay(Cluster& cluster, const Trace& trace, const ReplayOptions& opt) {
  RunReport report;
  report.mode = opt.mode_label.empty() ? std::string(sandbox::mode_name(cluster.config().mode)) : opt.mode_label;
  const auto checksums = seed_and_checksum(cluster, trace);
  auto before = backend_metrics(cluster);
  const auto gets_before = cluster.store().count(store::StoreOp::kGet);
  const auto puts_before = cluster.store().count(store::StoreOp::kPut);

  std::vector<InvocationResult> results(trace.size());
  auto client = cluster.client(opt.retry);
  const auto start = now_us();
  {
    TaskSet tasks;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      sleep_until_us(start + trace[i].t_ms * 1000);
      tasks.spawn([&, i] {
        auto out = client.invoke(promote_hints(trace[i]));
        results[i] = to_result(trace[i], i, out, checksums);
      });
    }
    tasks.join_all();
  }
  report.duration_us = now_us() - start;
  report.invocations = std::move(results);

  auto after = backend_metrics(cluster);
  report.counters.store_gets = cluster.store().count(store::StoreOp::kGet) - gets_before;
  report.counters.store_puts = cluster.store().count(store::StoreOp::kPut) - puts_before;
  report.counters.hint_mismatches = delta(before, after, "hint_mismatches");
  report.counters.prefetch_hits = delta(before, after, "prefetch_hits");
  report.counters.ring_gets = delta(before, after, "ring_gets");
  report.counters.write_retries = delta(before, after, "write_retries");
  summarize(report, opt.unloaded);
  return report;
}

std::map<std::string, double> measure_unloaded(Cluster& cluster, const Trace& trace, std::uint32_t runs) {
  std::map<std::string, const TraceEvent*> first;
  for (auto& ev : trace) first.emplace(ev.function, &ev);
  Trace probe;
  for (auto& [fn, ev] : first) probe.push_back(*ev);
  seed_and_checksum(cluster, probe);
  auto client = cluster.client();
  std::map<std::string, double> out;
  for (auto& ev : probe) {
    std::vector<std::uint64_t> totals;
    for (std::uint32_t i = 0; i <= runs; ++i) {
      auto o = client.invoke(promote_hints(ev));
      if (!o.response.ok) {
        spdlog::warn("unloaded probe of {} failed: {}", ev.function, o.response.error);
        continue;
      }
      if (i > 0) totals.push_back(o.response.breakdown_us.total);
    }
    out[ev.function] = median(totals);
  }
  return out;
}

void prewarm(Cluster& cluster, const Trace& trace, std::uint32_t concurrency) {
  std::map<std::string, const TraceEvent*> first;
  for (auto& ev : trace) first.emplace(ev.function, &ev);
  Trace probe;
  for (auto& [fn, ev] : first) probe.push_back(*ev);
  seed_and_checksum(cluster, probe);
  auto client = cluster.client();
  // One function at a time, so each gets `concurrency` distinct sandboxes.
  for (auto& ev : probe) {
    TaskSet tasks;
    for (std::uint32_t i = 0; i < concurrency; ++i) {
      tasks.spawn([&client, env = promote_hints(ev)] { client.invoke(env); });
    }
    tasks.join_all();
  }
}

// ------------------------------------------------------------------ sweep

SweepTemplate parse_sweep_template(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaError, std::string("sweep template: ") + e.what());
  }
  SweepTemplate t;
  try {
    t.rate_per_function = j.value("rate_per_function", t.rate_per_function);
    t.start = j.value("start", t.start);
    t.step = j.value("step", t.step);
    t.max_functions = j.value("max_functions", t.max_functions);
    t.node_memory_bytes = j.value("node_memory_bytes", t.node_memory_bytes);
    t.unloaded_runs = j.value("unloaded_runs", t.unloaded_runs);
    t.prewarm = j.value("prewarm", t.prewarm);
    t.gen.duration_ms = j.value("duration_ms", t.gen.duration_ms);
    t.gen.io_ratio = j.value("io_ratio", t.gen.io_ratio);
    t.gen.service_us = j.value("service_us", t.gen.service_us);
    t.gen.hinted_fraction = j.value("hinted_fraction", t.gen.hinted_fraction);
    t.gen.output_fraction = j.value("output_fraction", t.gen.output_fraction);
    t.gen.seed = j.value("seed", t.gen.seed);
    t.store.one_way_latency_us = j.value("store_latency_us", t.store.one_way_latency_us);
    t.store.bandwidth_bps = j.value("store_bandwidth_bps", t.store.bandwidth_bps);
    if (j.contains("backend")) t.backend = backend::parse_config(j["backend"].dump());
    if (j.contains("function")) {
      auto cfg = backend::parse_config(json{{"functions", json::array({j["function"]})}}.dump());
      t.function = cfg.functions.at(0);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaError, std::string("sweep template: ") + e.what());
  }
  if (t.step == 0 || t.start == 0) throw Error(Errc::kSchemaError, "sweep template: start and step must be positive");
  return t;
}

std::string SweepResult::to_json() const {
  json j{{"mode", std::string(sandbox::mode_name(mode))}, {"capacity", capacity}, {"density", density}};
  j["steps"] = json::array();
  for (auto& s : steps) {
    j["steps"].push_back({{"functions", s.functions},
                          {"geo_mean_slowdown", std::isfinite(s.geo_mean_slowdown) ? json(s.geo_mean_slowdown) : json("inf")},
                          {"invocations", s.invocations},
                          {"errors", s.errors},
                          {"passed", s.passed}});
  }
  return j.dump(2);
}

SweepResult density_sweep(const SweepTemplate& tmpl, sandbox::Mode mode, double slo) {
  SweepResult result;
  result.mode = mode;
  ClusterOptions copt;
  copt.store = tmpl.store;
  copt.backend = tmpl.backend;
  copt.backend.mode = mode;
  if (tmpl.node_memory_bytes > 0) {
    auto per_sandbox = std::max<std::uint64_t>(1, tmpl.function.restore.pages(mode) * shmem::kPageBytes);
    copt.backend.max_active_sandboxes = std::max<std::uint64_t>(1, tmpl.node_memory_bytes / per_sandbox);
  }
  result.capacity = copt.backend.max_active_sandboxes;
  copt.backend.functions.clear();
  for (std::uint32_t f = 0; f < tmpl.max_functions; ++f) {
    auto fn = tmpl.function;
    fn.name = function_name(f);
    fn.credentials_token = fmt::format("tok-{}-{:x}", fn.name, tmpl.gen.seed);
    copt.backend.functions.push_back(fn);
  }
  Cluster cluster(copt);

  std::map<std::string, double> unloaded;
  for (auto n = tmpl.start; n <= tmpl.max_functions; n += tmpl.step) {
    auto gen = tmpl.gen;
    gen.functions = n;
    gen.rate_per_s = tmpl.rate_per_function * n;
    gen.count.reset();
    auto trace = generate_trace(gen);
    // Profiles depend only on the seed and function index, so medians
    // measured at an earlier step stay valid.
    Trace fresh;
    for (auto& ev : trace) {
      if (!unloaded.count(ev.function)) fresh.push_back(ev);
    }
    for (auto& [fn, m] : measure_unloaded(cluster, fresh, tmpl.unloaded_runs)) unloaded[fn] = m;
    if (tmpl.prewarm > 1) prewarm(cluster, fresh, tmpl.prewarm);

    ReplayOptions ropt;
    ropt.unloaded = unloaded;
    auto report = replay(cluster, trace, ropt);
    SweepStep step{n, report.geo_mean_slowdown, report.invocations.size(), report.counters.errors, false};
    step.passed = step.errors == 0 && step.geo_mean_slowdown <= slo;
    spdlog::info("sweep {} n={} slowdown={:.2f} errors={}", sandbox::mode_name(mode), n, step.geo_mean_slowdown,
                 step.errors);
    result.steps.push_back(step);
    if (!step.passed) break;
    result.density = n;
  }
  return result;
}

// ------------------------------------------------------------------ faults

std::size_t FaultCampaignReport::total(std::size_t FaultRunResult::*field) const {
  std::size_t sum = 0;
  for (auto& r : runs) sum += r.*field;
  return sum;
}

std::string FaultCampaignReport::to_json() const {
  json j = json::array();
  for (auto& r : runs) {
    json plan = json::array();
    for (auto& f : r.plan) plan.push_back({{"point", std::string(backend::fault_point_name(f.point))}, {"nth", f.nth}});
    j.push_back({{"run", r.run},
                 {"plan", plan},
                 {"restarts", r.restarts},
                 {"events", r.events},
                 {"ok", r.ok},
                 {"errors", r.errors},
                 {"lost", r.lost},
                 {"doubled", r.doubled},
                 {"missing_objects", r.missing_objects},
                 {"duplicate_writes", r.duplicate_writes},
                 {"extra_gets", r.extra_gets},
                 {"retries", r.retries}});
  }
  return j.dump(2);
}

FaultCampaignReport run_fault_campaign(const FaultCampaignOptions& opt) {
  FaultCampaignReport report;
  std::mt19937_64 rng(opt.seed);
  for (std::uint32_t run = 0; run < opt.runs; ++run) {
    FaultRunResult res;
    res.run = run;
    const auto kills = std::uniform_int_distribution<std::uint32_t>(1, std::max(1u, opt.max_kills))(rng);
    for (std::uint32_t k = 0; k < kills; ++k) {
      auto point = std::bernoulli_distribution(0.5)(rng) ? backend::FaultPoint::kDuringPrefetch
                                                         : backend::FaultPoint::kPostFnResponsePreAck;
      auto nth = std::uniform_int_distribution<std::uint32_t>(1, std::max(1u, opt.events_per_run / 2))(rng);
      res.plan.push_back({point, nth});
    }

    ClusterOptions copt;
    copt.backend = opt.backend;
    copt.store = opt.store;
    copt.supervised = true;
    copt.backend_binary = opt.backend_binary;
    copt.faults = res.plan;
    if (copt.backend.functions.empty()) {
      backend::FunctionConfig fn;
      fn.name = function_name(0);
      fn.credentials_token = "tok-fault";
      fn.restore = {20'000, 0, 0, 0.31};
      copt.backend.functions.push_back(fn);
    }
    Cluster cluster(copt);

    Trace trace;
    for (std::uint32_t i = 0; i < opt.events_per_run; ++i) {
      TraceEvent ev;
      ev.t_ms = i * opt.event_gap_ms;
      ev.function = copt.backend.functions[i % copt.backend.functions.size()].name;
      ev.inputs.push_back({{"inputs", fmt::format("r{}/in-{}", run, i)}, opt.input_size});
      ev.output = SizedRef{{"outputs", fmt::format("r{}/out-{}", run, i)}, opt.output_size};
      ev.compute_us = 2'000;
      ev.hinted = true;
      trace.push_back(ev);
    }
    const auto checksums = seed_and_checksum(cluster, trace);
    std::vector<std::atomic<std::uint32_t>> outcomes(trace.size());
    std::vector<InvocationResult> results(trace.size());
    auto client = cluster.client(opt.retry);
    {
      TaskSet tasks;
      const auto start = now_us();
      for (std::size_t i = 0; i < trace.size(); ++i) {
        sleep_until_us(start + trace[i].t_ms * 1000);
        tasks.spawn([&, i] {
          auto out = client.invoke(promote_hints(trace[i]));
          results[i] = to_result(trace[i], i, out, checksums);
          // A response arrived iff the attempt that carried it completed.
          if (out.attempts > 0 && !out.response.error.starts_with("retry budget exhausted")) outcomes[i]++;
        });
      }
      tasks.join_all();
    }
    res.restarts = cluster.restarts();
    res.events = trace.size();
    for (std::size_t i = 0; i < trace.size(); ++i) {
      auto n = outcomes[i].load();
      if (n == 0) res.lost++;
      if (n > 1) res.doubled++;
      auto& r = results[i];
      res.retries += r.attempts > 1 ? r.attempts - 1 : 0;
      if (n == 1 && r.ok) {
        res.ok++;
        auto& out = *trace[i].output;
        auto obj = cluster.store().objects().get(out.ref);
        if (!obj || obj->data != frontend::synthetic_payload(out.ref, out.size)) {
          res.missing_objects++;
        } else if (obj->version > 1) {
          res.duplicate_writes++;
        }
        if (r.checksum_mismatches) res.missing_objects++;
      } else if (n == 1) {
        res.errors++;
      }
    }
    for (auto& ev : trace) {
      auto gets = cluster.store().count(store::StoreOp::kGet, ev.inputs[0].ref);
      if (gets > 1) res.extra_gets += gets - 1;
    }
    spdlog::info("fault run {}: kills={} restarts={} ok={} errors={} lost={} retries={} extra_gets={}", run,
                 res.plan.size(), res.restarts, res.ok, res.errors, res.lost, res.retries, res.extra_gets);
    report.runs.push_back(std::move(res));
  }
  return report;
}

}  // namespace nexus::harness
