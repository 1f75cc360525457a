// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "nexus/common/token_bucket.hpp"
#include "nexus/frontend/object_client.hpp"
#include "nexus/store/client.hpp"

namespace nexus::frontend {

/// CPU the guest spends in its own network stack and SDK per request.
/// Burned, not slept, so it competes for cores like the real thing.
struct FabricCost {
  std::uint64_t per_request_us = 2'000;
  std::uint64_t per_mib_us = 5'000;
  std::uint64_t rate_bps = 600'000'000;

  std::uint64_t cost_us(std::uint64_t bytes) const noexcept {
    return per_request_us + per_mib_us * bytes / (1u << 20);
  }
};

/// The coupled baseline: the guest talks to the store over its own
/// connection. Every GET lands in a guest-owned buffer.
class DirectStoreClient final : public ObjectClient {
 public:
  DirectStoreClient(const net::Endpoint& store, FabricCost cost);

  ObjectBody get_object(const ObjectRef& ref) override;
  std::uint64_t put_object(const ObjectRef& ref, ByteSpan data) override;
  CopyCounters counters() const override { return counters_; }

 private:
  store::StoreClient client_;
  FabricCost cost_;
  TokenBucket nic_;
  CopyCounters counters_;
};

}  // namespace nexus::frontend
