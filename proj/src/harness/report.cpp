// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/harness/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace nexus::harness {

using json = nlohmann::json;

double percentile(std::vector<std::uint64_t> values, double p) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return static_cast<double>(values[rank - 1]);
}

double median(std::vector<std::uint64_t> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  auto n = values.size();
  return n % 2 ? static_cast<double>(values[n / 2])
               : (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

double geometric_mean(const std::vector<double>& values) {
  if (values.empty()) return 0;
  double log_sum = 0;
  for (double v : values) log_sum += std::log(v);
  return std::exp(log_sum / static_cast<double>(values.size()));
}

void summarize(RunReport& report, const std::map<std::string, double>& unloaded) {
  std::map<std::string, std::vector<std::uint64_t>> totals;
  std::map<std::string, FunctionStats> stats;
  RunCounters c{};
  double io_sum = 0;
  std::size_t io_n = 0;
  for (auto& r : report.invocations) {
    auto& s = stats[r.function];
    s.function = r.function;
    s.count++;
    c.ingress_retries += r.attempts > 1 ? r.attempts - 1 : 0;
    c.checksum_mismatches += r.checksum_mismatches;
    if (!r.ok) {
      s.errors++;
      c.errors++;
      continue;
    }
    totals[r.function].push_back(r.breakdown.total);
    io_sum += static_cast<double>(r.io_us);
    io_n++;
    c.get_copies += r.copies.get_copies;
    // Ring reads copy once by design; anything beyond that on an invocation
    // that used slots is a slot-path copy.
    if (r.copies.slot_gets > 0) c.slot_get_copies += r.copies.get_copies - std::min(r.copies.get_copies, r.copies.ring_gets);
    c.put_copies += r.copies.put_copies;
    c.puts += r.copies.puts;
    c.bytes_copied += r.copies.get_copied_bytes + r.copies.put_copied_bytes;
  }
  // Backend-side counters are merged in by the caller; keep any it set.
  c.store_gets = report.counters.store_gets;
  c.store_puts = report.counters.store_puts;
  c.hint_mismatches = report.counters.hint_mismatches;
  c.prefetch_hits = report.counters.prefetch_hits;
  c.ring_gets = report.counters.ring_gets;
  c.write_retries = report.counters.write_retries;
  report.counters = c;
  report.mean_io_us = io_n ? io_sum / static_cast<double>(io_n) : 0;

  report.functions.clear();
  std::vector<double> slowdowns;
  for (auto& [fn, s] : stats) {
    auto& t = totals[fn];
    if (!t.empty()) {
      double sum = 0;
      for (auto v : t) sum += static_cast<double>(v);
      s.mean_us = sum / static_cast<double>(t.size());
      s.p50_us = percentile(t, 50);
      s.p99_us = percentile(t, 99);
    }
    if (auto it = unloaded.find(fn); it != unloaded.end() && it->second > 0) {
      s.unloaded_median_us = it->second;
      // A function whose invocations all failed violates any SLO.
      s.slowdown = t.empty() ? HUGE_VAL : s.p99_us / it->second;
      slowdowns.push_back(s.slowdown);
    }
    report.functions.push_back(s);
  }
  report.geo_mean_slowdown = geometric_mean(slowdowns);
}

namespace {

json breakdown_json(const proto::Breakdown& b) {
  return {{"queue", b.queue},         {"restore", b.restore},     {"prefetch", b.prefetch},
          {"exec", b.exec},           {"writeback", b.writeback}, {"total", b.total}};
}

}  // namespace

std::string RunReport::to_json() const {
  json j;
  j["mode"] = mode;
  j["duration_us"] = duration_us;
  j["mean_io_us"] = mean_io_us;
  j["geo_mean_slowdown"] = std::isfinite(geo_mean_slowdown) ? json(geo_mean_slowdown) : json("inf");
  auto& c = j["counters"];
  c = {{"get_copies", counters.get_copies},
       {"slot_get_copies", counters.slot_get_copies},
       {"put_copies", counters.put_copies},
       {"puts", counters.puts},
       {"bytes_copied", counters.bytes_copied},
       {"store_gets", counters.store_gets},
       {"store_puts", counters.store_puts},
       {"hint_mismatches", counters.hint_mismatches},
       {"prefetch_hits", counters.prefetch_hits},
       {"ring_gets", counters.ring_gets},
       {"ingress_retries", counters.ingress_retries},
       {"write_retries", counters.write_retries},
       {"errors", counters.errors},
       {"checksum_mismatches", counters.checksum_mismatches}};
  j["functions"] = json::array();
  for (auto& f : functions) {
    j["functions"].push_back({{"function", f.function},
                              {"count", f.count},
                              {"errors", f.errors},
                              {"mean_us", f.mean_us},
                              {"p50_us", f.p50_us},
                              {"p99_us", f.p99_us},
                              {"unloaded_median_us", f.unloaded_median_us},
                              {"slowdown", std::isfinite(f.slowdown) ? json(f.slowdown) : json("inf")}});
  }
  j["invocations"] = json::array();
  for (auto& r : invocations) {
    json e{{"index", r.index},
           {"function", r.function},
           {"t_ms", r.t_ms},
           {"hinted", r.hinted},
           {"status", r.ok ? "ok" : "error"},
           {"attempts", r.attempts},
           {"cold", r.cold},
           {"sandbox_id", r.sandbox_id},
           {"breakdown_us", breakdown_json(r.breakdown)},
           {"io_us", r.io_us},
           {"compute_us", r.compute_us}};
    if (!r.ok) e["error"] = r.error;
    j["invocations"].push_back(std::move(e));
  }
  return j.dump(2);
}

std::string RunReport::to_csv() const {
  std::string out =
      "index,function,t_ms,hinted,status,attempts,cold,queue_us,restore_us,prefetch_us,exec_us,writeback_us,"
      "total_us,io_us,compute_us\n";
  for (auto& r : invocations) {
    auto& b = r.breakdown;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.index, r.function, r.t_ms, r.hinted ? 1 : 0,
                       r.ok ? "ok" : "error", r.attempts, r.cold ? 1 : 0, b.queue, b.restore, b.prefetch, b.exec,
                       b.writeback, b.total, r.io_us, r.compute_us);
  }
  return out;
}

}  // namespace nexus::harness
