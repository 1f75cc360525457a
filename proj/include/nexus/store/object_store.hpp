// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "nexus/common/bytes.hpp"
#include "nexus/proto/envelope.hpp"

namespace nexus::store {

using proto::ObjectRef;

struct StoredObject {
  ObjectRef ref;
  Bytes data;
  std::uint64_t version = 0;
};

/// In-memory object map. Readers get an immutable snapshot, so a concurrent
/// put never exposes a torn object.
class ObjectStore {
 public:
  std::shared_ptr<const StoredObject> get(const ObjectRef& ref) const;
  /// Stores a new version; returns it (1 on first put, +1 after).
  std::uint64_t put(const ObjectRef& ref, Bytes data);
  std::uint64_t version(const ObjectRef& ref) const;
  std::size_t object_count() const;
  std::vector<ObjectRef> refs() const;

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<ObjectRef, std::shared_ptr<const StoredObject>, proto::ObjectRefHash> objects_;
};

}  // namespace nexus::store
