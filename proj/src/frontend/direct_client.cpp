// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/frontend/direct_client.hpp"

#include "nexus/common/clock.hpp"

namespace nexus::frontend {

DirectStoreClient::DirectStoreClient(const net::Endpoint& store, FabricCost cost)
    : client_(store), cost_(cost), nic_(cost.rate_bps, cost.rate_bps / 8) {}

ObjectBody DirectStoreClient::get_object(const ObjectRef& ref) {
  auto conn = client_.acquire();
  const auto size = conn->begin_get(ref);
  spin_for_us(cost_.cost_us(size));
  nic_.acquire(size);
  Bytes buf(size);
  conn->read_body(buf);
  counters_.get_copies++;
  counters_.get_copied_bytes += size;
  return ObjectBody(std::move(buf));
}

std::uint64_t DirectStoreClient::put_object(const ObjectRef& ref, ByteSpan data) {
  spin_for_us(cost_.cost_us(data.size()));
  nic_.acquire(data.size());
  counters_.puts++;
  counters_.put_copies++;
  counters_.put_copied_bytes += data.size();
  return client_.put(ref, data);
}

}  // namespace nexus::frontend
