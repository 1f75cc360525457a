// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/harness/trace.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "nexus/common/error.hpp"
#include "nexus/frontend/handler.hpp"

namespace nexus::harness {

using json = nlohmann::json;

namespace {

json ref_json(const SizedRef& r) { return {{"bucket", r.ref.bucket}, {"key", r.ref.key}, {"size", r.size}}; }

SizedRef ref_from(const json& j, const std::string& path) {
  if (!j.is_object()) throw Error(Errc::kSchemaError, path + ": expected an object");
  SizedRef r;
  try {
    r.ref.bucket = j.at("bucket").get<std::string>();
    r.ref.key = j.at("key").get<std::string>();
    r.size = j.at("size").get<std::uint64_t>();
  } catch (const json::exception&) {
    throw Error(Errc::kSchemaError, path + ": needs bucket, key and an unsigned size");
  }
  r.ref.validate();
  return r;
}

}  // namespace

std::string serialize_event(const TraceEvent& ev) {
  json j{{"t_ms", ev.t_ms}, {"function", ev.function}, {"compute_us", ev.compute_us}, {"hinted", ev.hinted}};
  j["inputs"] = json::array();
  for (auto& in : ev.inputs) j["inputs"].push_back(ref_json(in));
  j["output"] = ev.output ? ref_json(*ev.output) : json(nullptr);
  return j.dump();
}

TraceEvent parse_event(ByteSpan text) {
  json j;
  try {
    j = json::parse(as_chars(text));
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaError, std::string("trace event: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::kSchemaError, "trace event: expected an object");
  TraceEvent ev;
  try {
    ev.t_ms = j.value("t_ms", std::uint64_t{0});
    ev.function = j.at("function").get<std::string>();
    ev.compute_us = j.value("compute_us", std::uint64_t{0});
    ev.hinted = j.value("hinted", true);
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaError, std::string("trace event: ") + e.what());
  }
  if (ev.function.empty()) throw Error(Errc::kSchemaError, "function: must not be empty");
  if (j.contains("inputs")) {
    if (!j["inputs"].is_array()) throw Error(Errc::kSchemaError, "inputs: expected an array");
    for (std::size_t i = 0; i < j["inputs"].size(); ++i) {
      ev.inputs.push_back(ref_from(j["inputs"][i], fmt::format("inputs[{}]", i)));
    }
  }
  if (j.contains("output") && !j["output"].is_null()) ev.output = ref_from(j["output"], "output");
  return ev;
}

Trace parse_trace(std::string_view jsonl) {
  Trace trace;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.push_back(parse_event(as_bytes(line)));
    } catch (const Error& e) {
      throw Error(Errc::kSchemaError, fmt::format("line {}: {}", lineno, e.what()));
    }
    if (trace.size() > 1 && trace.back().t_ms < trace[trace.size() - 2].t_ms) {
      throw Error(Errc::kSchemaError, fmt::format("line {}: events must be sorted by t_ms", lineno));
    }
  }
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kFilesystemError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

std::string serialize_trace(const Trace& trace) {
  std::string out;
  for (auto& ev : trace) out += serialize_event(ev) + "\n";
  return out;
}

proto::InvocationEnvelope promote_hints(const TraceEvent& ev) {
  proto::InvocationEnvelope env;
  env.function = ev.function;
  frontend::HandlerEvent hev;
  hev.compute_us = ev.compute_us;
  for (auto& in : ev.inputs) {
    hev.inputs.push_back(in.ref);
    if (ev.hinted) env.input_hints.push_back({in.ref, in.size});
  }
  if (ev.output) {
    hev.output = frontend::OutputSpec{ev.output->ref, ev.output->size};
    if (ev.hinted) env.output_hints.push_back(ev.output->ref);
  }
  env.event_body = to_bytes(frontend::serialize_handler_event(hev));
  return env;
}

proto::InvocationEnvelope promote_hints(ByteSpan event_json) { return promote_hints(parse_event(event_json)); }

std::map<ObjectRef, std::uint64_t> input_objects(const Trace& trace) {
  std::map<ObjectRef, std::uint64_t> out;
  for (auto& ev : trace) {
    for (auto& in : ev.inputs) {
      auto [it, fresh] = out.emplace(in.ref, in.size);
      if (!fresh && it->second != in.size) {
        throw Error(Errc::kSchemaError, fmt::format("{} appears with sizes {} and {}", in.ref.to_string(),
                                                    it->second, in.size));
      }
    }
  }
  return out;
}

std::string function_name(std::uint32_t index) { return fmt::format("fn-{:03}", index); }

Trace generate_trace(const GenOptions& opt) {
  if (opt.functions == 0) throw Error(Errc::kSchemaError, "functions: must be positive");
  if (!(opt.rate_per_s > 0)) throw Error(Errc::kSchemaError, "rate: must be positive");
  if (opt.io_ratio < 0 || opt.io_ratio > 1) throw Error(Errc::kSchemaError, "io-ratio: must be in [0, 1]");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);

  struct Profile {
    std::uint64_t input_size;
    std::uint64_t compute_us;
  };
  std::vector<Profile> profiles;
  const double io_us = opt.io_ratio * static_cast<double>(opt.service_us);
  for (std::uint32_t f = 0; f < opt.functions; ++f) {
    auto bytes = io_us * 1e-6 * static_cast<double>(opt.ref_bandwidth_bps) / 8.0 * jitter(rng);
    auto compute = (1.0 - opt.io_ratio) * static_cast<double>(opt.service_us) * jitter(rng);
    profiles.push_back({std::max<std::uint64_t>(1, std::llround(bytes)), static_cast<std::uint64_t>(std::llround(compute))});
  }

  std::exponential_distribution<double> gap(opt.rate_per_s / 1000.0);  // per ms
  std::uniform_int_distribution<std::uint32_t> pick_fn(0, opt.functions - 1);
  std::uniform_int_distribution<std::uint32_t> pick_obj(0, std::max(1u, opt.objects_per_function) - 1);
  std::bernoulli_distribution hinted(opt.hinted_fraction);

  Trace trace;
  double t = 0;
  for (std::uint32_t i = 0;; ++i) {
    if (opt.count ? i >= *opt.count : false) break;
    t += gap(rng);
    auto t_ms = static_cast<std::uint64_t>(t);
    if (!opt.count && t_ms >= opt.duration_ms) break;
    const auto f = pick_fn(rng);
    const auto& p = profiles[f];
    TraceEvent ev;
    ev.t_ms = t_ms;
    ev.function = function_name(f);
    ev.compute_us = p.compute_us;
    ev.inputs.push_back({{"inputs", fmt::format("{}/obj-{}", ev.function, pick_obj(rng))}, p.input_size});
    auto out_size = static_cast<std::uint64_t>(std::llround(static_cast<double>(p.input_size) * opt.output_fraction));
    if (out_size > 0) ev.output = SizedRef{{"outputs", fmt::format("{}/{:06}", ev.function, i)}, out_size};
    ev.hinted = hinted(rng);
    trace.push_back(std::move(ev));
  }
  return trace;
}

}  // namespace nexus::harness
