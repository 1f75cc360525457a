// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "nexus/common/token_bucket.hpp"

namespace nexus::backend {

/// Per-function transmission limit, divided equally among the function's
/// storage clients. Each (function, client) pair owns a token bucket with a
/// one-second burst that starts empty.
class RateLimiter {
 public:
  struct ClientStats {
    std::uint64_t bytes = 0;
    std::uint64_t first_us = 0;  // first grant
    std::uint64_t last_us = 0;   // last grant
  };

  /// (Re)configures a function. Buckets of unchanged shares are kept, so a
  /// reload does not refill them.
  void configure(const std::string& function, std::uint64_t rate_bps, const std::vector<std::string>& clients);

  /// Blocks until `n_bytes` may move. Large requests are admitted in
  /// burst-sized pieces. Zero returns immediately.
  void acquire(const std::string& function, const std::string& client, std::uint64_t n_bytes);

  /// The client a transfer to `bucket` is charged to.
  std::string client_for(const std::string& function, const std::string& bucket) const;
  std::uint64_t share_bps(const std::string& function) const;
  ClientStats stats(const std::string& function, const std::string& client) const;

 private:
  struct Entry {
    std::shared_ptr<TokenBucket> bucket;
    ClientStats stats;
  };
  struct Function {
    std::uint64_t share_bps = 0;
    std::vector<std::string> clients;
    std::map<std::string, Entry> buckets;
  };
  mutable std::mutex mu_;
  std::map<std::string, Function> functions_;
};

}  // namespace nexus::backend
