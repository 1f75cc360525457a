// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nexus/common/bytes.hpp"
#include "nexus/common/ids.hpp"

namespace nexus::proto {

inline constexpr std::size_t kMaxBucketBytes = 63;
inline constexpr std::size_t kMaxKeyBytes = 1024;
inline constexpr std::size_t kMaxEventBodyBytes = 64 * 1024;
inline constexpr std::uint64_t kDefaultMaxObjectBytes = 256ull << 20;

/// (bucket, key) name of a remote object.
struct ObjectRef {
  std::string bucket;
  std::string key;

  /// Throws SchemaError when empty, too long, or containing NUL.
  void validate() const;
  std::string to_string() const { return bucket + "/" + key; }

  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
  friend auto operator<=>(const ObjectRef&, const ObjectRef&) = default;
};

struct ObjectRefHash {
  std::size_t operator()(const ObjectRef& r) const noexcept;
};

struct InputHint {
  ObjectRef ref;
  std::optional<std::uint64_t> size_bytes;

  friend bool operator==(const InputHint&, const InputHint&) = default;
};

/// An ingress invocation. Hints form an unordered set keyed by ref; an empty
/// input list means the payload is opaque and GETs take the streaming path.
struct InvocationEnvelope {
  Id128 invocation_id;  // all-zero until assigned by the ingress
  Id128 idempotency_key;
  std::string function;
  std::vector<InputHint> input_hints;
  std::vector<ObjectRef> output_hints;
  Bytes event_body;

  bool opaque_inputs() const noexcept { return input_hints.empty(); }

  friend bool operator==(const InvocationEnvelope&, const InvocationEnvelope&) = default;
};

/// Parses and validates the JSON body of an INGRESS_INVOKE frame.
/// Errors: SchemaError naming the first offending field; HintTooLarge when a
/// size hint exceeds `max_object_bytes`.
InvocationEnvelope parse_envelope(ByteSpan json,
                                  std::uint64_t max_object_bytes = kDefaultMaxObjectBytes);
std::string serialize_envelope(const InvocationEnvelope& env);

}  // namespace nexus::proto
