// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/frontend/handler.hpp"

#include <json.hpp>

#include <cstring>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/common/fnv.hpp"

namespace nexus::frontend {

using json = nlohmann::json;

namespace {

ObjectRef ref_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("bucket") || !j.contains("key") || !j["bucket"].is_string() ||
      !j["key"].is_string()) {
    throw Error(Errc::kSchemaError, where + ": expected {bucket, key}");
  }
  ObjectRef r{j["bucket"].get<std::string>(), j["key"].get<std::string>()};
  r.validate();
  return r;
}

json ref_json(const ObjectRef& r) { return {{"bucket", r.bucket}, {"key", r.key}}; }

json counters_json(const CopyCounters& c) {
  return {{"get_copies", c.get_copies}, {"get_copied_bytes", c.get_copied_bytes},
          {"put_copies", c.put_copies}, {"put_copied_bytes", c.put_copied_bytes},
          {"slot_gets", c.slot_gets},   {"ring_gets", c.ring_gets},
          {"puts", c.puts}};
}

CopyCounters counters_from(const json& j) {
  CopyCounters c;
  c.get_copies = j.value("get_copies", 0ull);
  c.get_copied_bytes = j.value("get_copied_bytes", 0ull);
  c.put_copies = j.value("put_copies", 0ull);
  c.put_copied_bytes = j.value("put_copied_bytes", 0ull);
  c.slot_gets = j.value("slot_gets", 0ull);
  c.ring_gets = j.value("ring_gets", 0ull);
  c.puts = j.value("puts", 0ull);
  return c;
}

CopyCounters delta(const CopyCounters& a, const CopyCounters& b) {
  return {b.get_copies - a.get_copies, b.get_copied_bytes - a.get_copied_bytes,
          b.put_copies - a.put_copies, b.put_copied_bytes - a.put_copied_bytes,
          b.slot_gets - a.slot_gets,   b.ring_gets - a.ring_gets,
          b.puts - a.puts};
}

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

HandlerEvent parse_handler_event(ByteSpan body) {
  json j = json::parse(as_chars(body), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::kSchemaError, "event: not a JSON object");
  HandlerEvent ev;
  if (j.contains("inputs")) {
    if (!j["inputs"].is_array()) throw Error(Errc::kSchemaError, "inputs: expected an array");
    for (std::size_t i = 0; i < j["inputs"].size(); ++i) {
      ev.inputs.push_back(ref_from(j["inputs"][i], "inputs[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("compute_us")) {
    if (!j["compute_us"].is_number_unsigned()) throw Error(Errc::kSchemaError, "compute_us: expected an unsigned integer");
    ev.compute_us = j["compute_us"].get<std::uint64_t>();
  }
  if (j.contains("output") && !j["output"].is_null()) {
    const auto& o = j["output"];
    OutputSpec out{ref_from(o, "output"), 0};
    if (!o.contains("size") || !o["size"].is_number_unsigned()) {
      throw Error(Errc::kSchemaError, "output.size: expected an unsigned integer");
    }
    out.size = o["size"].get<std::uint64_t>();
    ev.output = out;
  }
  ev.fail = j.value("fail", false);
  return ev;
}

std::string serialize_handler_event(const HandlerEvent& ev) {
  json j;
  j["inputs"] = json::array();
  for (auto& r : ev.inputs) j["inputs"].push_back(ref_json(r));
  j["compute_us"] = ev.compute_us;
  if (ev.output) {
    auto o = ref_json(ev.output->ref);
    o["size"] = ev.output->size;
    j["output"] = o;
  }
  if (ev.fail) j["fail"] = true;
  return j.dump();
}

Bytes synthetic_payload(const ObjectRef& ref, std::uint64_t size) {
  Bytes out(size);
  std::uint64_t state = fnv1a64(as_bytes(ref.to_string()));
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    auto v = splitmix(state);
    std::memcpy(out.data() + i, &v, 8);
  }
  if (i < size) {
    auto v = splitmix(state);
    std::memcpy(out.data() + i, &v, size - i);
  }
  return out;
}

std::string serialize_report(const HandlerReport& r) {
  json j;
  j["inputs"] = json::array();
  for (auto& in : r.inputs) {
    auto e = ref_json(in.ref);
    e["size"] = in.size;
    e["checksum"] = in.checksum;
    e["zero_copy"] = in.zero_copy;
    j["inputs"].push_back(e);
  }
  if (r.output) {
    auto o = ref_json(r.output->ref);
    o["size"] = r.output->size;
    o["checksum"] = r.output_checksum;
    o["version"] = r.output_version;
    j["output"] = o;
  }
  j["compute_us"] = r.compute_us;
  j["io_us"] = r.io_us;
  j["copies"] = counters_json(r.copies);
  return j.dump();
}

HandlerReport parse_report(ByteSpan body) {
  json j = json::parse(as_chars(body), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::kSchemaError, "report: not a JSON object");
  HandlerReport r;
  try {
    for (auto& e : j.at("inputs")) {
      r.inputs.push_back({ref_from(e, "inputs"), e.at("size").get<std::uint64_t>(),
                          e.at("checksum").get<std::uint64_t>(), e.at("zero_copy").get<bool>()});
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      r.output = OutputSpec{ref_from(o, "output"), o.at("size").get<std::uint64_t>()};
      r.output_checksum = o.at("checksum").get<std::uint64_t>();
      r.output_version = o.at("version").get<std::uint64_t>();
    }
    r.compute_us = j.at("compute_us").get<std::uint64_t>();
    r.io_us = j.at("io_us").get<std::uint64_t>();
    r.copies = counters_from(j.at("copies"));
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaError, std::string("report: ") + e.what());
  }
  return r;
}

HandlerReport run_synthetic_handler(ObjectClient& client, const HandlerEvent& ev) {
  if (ev.fail) throw Error(Errc::kHandlerError, "handler failed as requested");
  HandlerReport rep;
  const auto before = client.counters();
  for (auto& ref : ev.inputs) {
    auto t0 = now_us();
    auto body = client.get_object(ref);
    rep.io_us += now_us() - t0;
    InputReport in{ref, body.size(), 0, body.is_view()};
    if (body.is_view()) {
      in.checksum = fnv1a64(body.contiguous());
    } else {
      // Streams are hashed chunk by chunk so memory stays bounded; only the
      // time spent waiting on the transfer counts as I/O.
      Fnv1a64 h;
      Bytes chunk(256 * 1024);
      for (;;) {
        auto r0 = now_us();
        auto n = body.read(chunk);
        rep.io_us += now_us() - r0;
        if (n == 0) break;
        h.update(ByteSpan(chunk).first(n));
      }
      in.checksum = h.digest();
    }
    rep.inputs.push_back(in);
  }
  {
    auto t0 = now_us();
    spin_for_us(ev.compute_us);
    rep.compute_us = now_us() - t0;
  }
  if (ev.output) {
    auto data = synthetic_payload(ev.output->ref, ev.output->size);
    rep.output = ev.output;
    rep.output_checksum = fnv1a64(data);
    auto t0 = now_us();
    rep.output_version = client.put_object(ev.output->ref, data);
    rep.io_us += now_us() - t0;
  }
  rep.copies = delta(before, client.counters());
  return rep;
}

}  // namespace nexus::frontend
