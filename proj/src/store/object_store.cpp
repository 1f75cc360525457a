// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/store/object_store.hpp"

#include <mutex>

namespace nexus::store {

std::shared_ptr<const StoredObject> ObjectStore::get(const ObjectRef& ref) const {
  std::shared_lock lock(mu_);
  auto it = objects_.find(ref);
  return it == objects_.end() ? nullptr : it->second;
}

std::uint64_t ObjectStore::put(const ObjectRef& ref, Bytes data) {
  auto obj = std::make_shared<StoredObject>();
  obj->ref = ref;
  obj->data = std::move(data);
  std::unique_lock lock(mu_);
  auto& slot = objects_[ref];
  obj->version = slot ? slot->version + 1 : 1;
  slot = std::move(obj);
  return slot->version;
}

std::uint64_t ObjectStore::version(const ObjectRef& ref) const {
  auto obj = get(ref);
  return obj ? obj->version : 0;
}

std::size_t ObjectStore::object_count() const {
  std::shared_lock lock(mu_);
  return objects_.size();
}

std::vector<ObjectRef> ObjectStore::refs() const {
  std::shared_lock lock(mu_);
  std::vector<ObjectRef> out;
  out.reserve(objects_.size());
  for (const auto& [ref, _] : objects_) out.push_back(ref);
  return out;
}

}  // namespace nexus::store
