// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/proto/envelope.hpp"

#include <fmt/format.h>

#include <json.hpp>

#include "nexus/common/base64.hpp"

namespace nexus::proto {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(std::string_view field, std::string_view why) {
  throw Error(Errc::kSchemaError, fmt::format("field '{}': {}", field, why));
}

std::string require_string(const json& obj, const char* name, std::string_view path) {
  auto it = obj.find(name);
  if (it == obj.end()) schema_error(fmt::format("{}{}", path, name), "missing");
  if (!it->is_string()) schema_error(fmt::format("{}{}", path, name), "must be a string");
  return it->get<std::string>();
}

ObjectRef parse_ref(const json& obj, std::string_view path) {
  if (!obj.is_object()) schema_error(path, "must be an object");
  ObjectRef ref{require_string(obj, "bucket", path), require_string(obj, "key", path)};
  try {
    ref.validate();
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
  return ref;
}

Id128 parse_id(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) return Id128{};
  if (!it->is_string()) schema_error(name, "must be a hex string");
  auto id = Id128::from_hex(it->get<std::string>());
  if (!id) schema_error(name, "must be 32 hex digits");
  return *id;
}

}  // namespace

void ObjectRef::validate() const {
  if (bucket.empty() || bucket.size() > kMaxBucketBytes) {
    throw Error(Errc::kSchemaError, "bucket must be 1-63 bytes");
  }
  if (key.empty() || key.size() > kMaxKeyBytes) {
    throw Error(Errc::kSchemaError, "key must be 1-1024 bytes");
  }
  if (bucket.find('\0') != std::string::npos || key.find('\0') != std::string::npos) {
    throw Error(Errc::kSchemaError, "bucket and key must not contain NUL");
  }
}

std::size_t ObjectRefHash::operator()(const ObjectRef& r) const noexcept {
  auto h = std::hash<std::string>{}(r.bucket);
  return h ^ (std::hash<std::string>{}(r.key) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

InvocationEnvelope parse_envelope(ByteSpan body, std::uint64_t max_object_bytes) {
  json doc;
  try {
    doc = json::parse(as_chars(body));
  } catch (const json::parse_error& e) {
    throw Error(Errc::kSchemaError, fmt::format("body is not JSON: {}", e.what()));
  }
  if (!doc.is_object()) schema_error("$", "must be an object");

  InvocationEnvelope env;
  env.invocation_id = parse_id(doc, "invocation_id");
  env.idempotency_key = parse_id(doc, "idempotency_key");
  env.function = require_string(doc, "function", "");
  if (env.function.empty()) schema_error("function", "must be non-empty");

  if (auto it = doc.find("inputs"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) schema_error("inputs", "must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& item = (*it)[i];
      auto path = fmt::format("inputs[{}].", i);
      InputHint hint{parse_ref(item, path), std::nullopt};
      if (auto s = item.find("size_bytes"); s != item.end() && !s->is_null()) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
          schema_error(path + "size_bytes", "must be a non-negative integer");
        }
        auto size = s->get<std::uint64_t>();
        if (size > max_object_bytes) {
          throw Error(Errc::kHintTooLarge,
                      fmt::format("{}size_bytes = {} exceeds the {} byte maximum", path, size,
                                  max_object_bytes));
        }
        hint.size_bytes = size;
      }
      env.input_hints.push_back(std::move(hint));
    }
  }
  if (auto it = doc.find("outputs"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) schema_error("outputs", "must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      env.output_hints.push_back(parse_ref((*it)[i], fmt::format("outputs[{}].", i)));
    }
  }
  if (auto it = doc.find("event_body_b64"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) schema_error("event_body_b64", "must be a string");
    auto decoded = base64_decode(it->get<std::string>());
    if (!decoded) schema_error("event_body_b64", "invalid base64");
    if (decoded->size() > kMaxEventBodyBytes) schema_error("event_body_b64", "exceeds 64 KiB");
    env.event_body = std::move(*decoded);
  }
  return env;
}

std::string serialize_envelope(const InvocationEnvelope& env) {
  json doc;
  if (!env.invocation_id.is_zero()) doc["invocation_id"] = env.invocation_id.hex();
  if (!env.idempotency_key.is_zero()) doc["idempotency_key"] = env.idempotency_key.hex();
  doc["function"] = env.function;
  doc["inputs"] = json::array();
  for (const auto& h : env.input_hints) {
    json item{{"bucket", h.ref.bucket}, {"key", h.ref.key}};
    if (h.size_bytes) item["size_bytes"] = *h.size_bytes;
    doc["inputs"].push_back(std::move(item));
  }
  doc["outputs"] = json::array();
  for (const auto& r : env.output_hints) {
    doc["outputs"].push_back({{"bucket", r.bucket}, {"key", r.key}});
  }
  doc["event_body_b64"] = base64_encode(env.event_body);
  return doc.dump();
}

}  // namespace nexus::proto
