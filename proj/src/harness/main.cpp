// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "nexus/harness/cli.hpp"
#include "nexus/harness/replay.hpp"

namespace nexus::harness {

namespace {

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::kFilesystemError, "cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kFilesystemError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Registers every function the trace names that the config lacks.
void register_functions(backend::BackendConfig& cfg, const Trace& trace) {
  for (auto& ev : trace) {
    if (cfg.find(ev.function)) continue;
    backend::FunctionConfig fn;
    fn.name = ev.function;
    fn.credentials_token = "tok-" + ev.function;
    fn.restore = cfg.default_restore;
    cfg.functions.push_back(fn);
  }
}

}  // namespace

int harness_main(int argc, char** argv) {
  CLI::App app{"Nexus load generator and experiment harness"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Replay a JSON-lines trace against an in-process cluster");
  std::string trace_path, mode = "offloaded-async", report_path, csv_path, config_path;
  store::StoreProfile store_profile;
  std::uint32_t unloaded_runs = 5;
  replay_cmd->add_option("--trace", trace_path)->required();
  replay_cmd->add_option("--mode", mode, "coupled | offloaded | offloaded-async");
  replay_cmd->add_option("--report", report_path, "Report JSON (default stdout)");
  replay_cmd->add_option("--csv", csv_path, "Per-invocation CSV");
  replay_cmd->add_option("--config", config_path, "Backend config JSON");
  replay_cmd->add_option("--store-latency-us", store_profile.one_way_latency_us);
  replay_cmd->add_option("--store-bandwidth-bps", store_profile.bandwidth_bps)->check(CLI::PositiveNumber);
  replay_cmd->add_option("--unloaded-runs", unloaded_runs, "Warm probes per function for slowdown; 0 skips");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Density sweep under a p99 slowdown SLO");
  std::string template_path, sweep_out;
  double slo = 5.0;
  std::vector<std::string> modes{"coupled", "offloaded", "offloaded-async"};
  sweep_cmd->add_option("--template", template_path)->required();
  sweep_cmd->add_option("--slo", slo, "p99 / unloaded-median bound; inf disables");
  sweep_cmd->add_option("--modes", modes)->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out);

  // gen-trace
  auto* gen_cmd = app.add_subcommand("gen-trace", "Generate a synthetic Poisson trace");
  GenOptions gen;
  std::uint32_t count = 0;
  std::string gen_out;
  gen_cmd->add_option("--functions", gen.functions);
  gen_cmd->add_option("--rate", gen.rate_per_s, "Aggregate arrivals per second");
  gen_cmd->add_option("--io-ratio", gen.io_ratio)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--duration-ms", gen.duration_ms);
  gen_cmd->add_option("--count", count, "Exact event count (overrides duration)");
  gen_cmd->add_option("--service-us", gen.service_us);
  gen_cmd->add_option("--hinted-fraction", gen.hinted_fraction)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--out", gen_out);

  // faults
  auto* faults_cmd = app.add_subcommand("faults", "Randomized crash-and-restart campaign");
  FaultCampaignOptions fopt;
  std::string faults_out;
  faults_cmd->add_option("--runs", fopt.runs);
  faults_cmd->add_option("--seed", fopt.seed);
  faults_cmd->add_option("--events", fopt.events_per_run);
  faults_cmd->add_option("--max-kills", fopt.max_kills);
  faults_cmd->add_option("--out", faults_out);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen_cmd) {
      if (count) gen.count = count;
      write_or_print(gen_out, serialize_trace(generate_trace(gen)));
      return 0;
    }
    if (*replay_cmd) {
      auto trace = load_trace(trace_path);
      ClusterOptions copt;
      if (!config_path.empty()) copt.backend = backend::load_config(config_path);
      copt.backend.mode = sandbox::parse_mode(mode);
      copt.store = store_profile;
      register_functions(copt.backend, trace);
      Cluster cluster(copt);
      ReplayOptions ropt;
      if (unloaded_runs > 0) ropt.unloaded = measure_unloaded(cluster, trace, unloaded_runs);
      auto report = replay(cluster, trace, ropt);
      write_or_print(report_path, report.to_json());
      if (!csv_path.empty()) write_or_print(csv_path, report.to_csv());
      return report.counters.errors == 0 ? 0 : 2;
    }
    if (*sweep_cmd) {
      auto tmpl = parse_sweep_template(read_file(template_path));
      nlohmann::json all = nlohmann::json::array();
      for (auto& m : modes) {
        auto r = density_sweep(tmpl, sandbox::parse_mode(m), slo);
        all.push_back(nlohmann::json::parse(r.to_json()));
      }
      write_or_print(sweep_out, all.dump(2));
      return 0;
    }
    if (*faults_cmd) {
      auto report = run_fault_campaign(fopt);
      write_or_print(faults_out, report.to_json());
      auto bad = report.total(&FaultRunResult::lost) + report.total(&FaultRunResult::doubled) +
                 report.total(&FaultRunResult::missing_objects);
      return bad == 0 ? 0 : 2;
    }
  } catch (const std::exception& e) {
    spdlog::error("harness: {}", e.what());
    return 1;
  }
  return 0;
}

}  // namespace nexus::harness
