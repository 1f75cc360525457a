// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/proto/ingress.hpp"

#include <fmt/format.h>

#include <json.hpp>

#include "nexus/common/base64.hpp"

namespace nexus::proto {

using nlohmann::json;

std::string serialize_response(const IngressResponse& r) {
  json doc;
  doc["invocation_id"] = r.invocation_id.hex();
  if (!r.idempotency_key.is_zero()) doc["idempotency_key"] = r.idempotency_key.hex();
  doc["status"] = r.ok ? "ok" : "error";
  if (!r.ok) doc["error"] = r.error;
  if (!r.payload.empty()) doc["payload_b64"] = base64_encode(r.payload);
  const auto& b = r.breakdown_us;
  doc["breakdown_us"] = {{"queue", b.queue},         {"restore", b.restore}, {"prefetch", b.prefetch},
                         {"exec", b.exec},           {"writeback", b.writeback},
                         {"total", b.total}};
  const auto& t = r.timestamps_us;
  doc["timestamps_us"] = {{"received", t.received},       {"admitted", t.admitted},
                          {"ready", t.ready},             {"invoke_sent", t.invoke_sent},
                          {"fn_response", t.fn_response}, {"last_write_ack", t.last_write_ack},
                          {"released", t.released}};
  doc["sandbox_id"] = r.sandbox_id;
  doc["cold"] = r.cold;
  return doc.dump();
}

IngressResponse parse_response(ByteSpan body) {
  IngressResponse r;
  try {
    auto doc = json::parse(as_chars(body));
    auto id = Id128::from_hex(doc.at("invocation_id").get<std::string>());
    if (!id) throw Error(Errc::kSchemaError, "invocation_id must be 32 hex digits");
    r.invocation_id = *id;
    if (auto it = doc.find("idempotency_key"); it != doc.end()) {
      r.idempotency_key = Id128::from_hex(it->get<std::string>()).value_or(Id128{});
    }
    auto status = doc.at("status").get<std::string>();
    if (status != "ok" && status != "error") throw Error(Errc::kSchemaError, "status must be ok|error");
    r.ok = status == "ok";
    r.error = doc.value("error", "");
    if (auto it = doc.find("payload_b64"); it != doc.end()) {
      auto decoded = base64_decode(it->get<std::string>());
      if (!decoded) throw Error(Errc::kSchemaError, "payload_b64 is not base64");
      r.payload = std::move(*decoded);
    }
    const auto& b = doc.at("breakdown_us");
    r.breakdown_us = {b.at("queue"), b.at("restore"), b.at("prefetch"), b.at("exec"),
                      b.at("writeback"), b.value("total", std::uint64_t{0})};
    if (auto it = doc.find("timestamps_us"); it != doc.end()) {
      const auto& t = *it;
      r.timestamps_us = {t.value("received", std::uint64_t{0}),    t.value("admitted", std::uint64_t{0}),
                         t.value("ready", std::uint64_t{0}),       t.value("invoke_sent", std::uint64_t{0}),
                         t.value("fn_response", std::uint64_t{0}), t.value("last_write_ack", std::uint64_t{0}),
                         t.value("released", std::uint64_t{0})};
    }
    r.sandbox_id = doc.value("sandbox_id", std::uint64_t{0});
    r.cold = doc.value("cold", false);
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaError, fmt::format("INGRESS_RESPONSE: {}", e.what()));
  }
  return r;
}

}  // namespace nexus::proto
