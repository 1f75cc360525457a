// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/rate_limiter.hpp"

#include <algorithm>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"

namespace nexus::backend {

void RateLimiter::configure(const std::string& function, std::uint64_t rate_bps,
                            const std::vector<std::string>& clients) {
  if (rate_bps == 0 || clients.empty()) throw Error(Errc::kSchemaError, function + ": bad rate limit");
  const std::uint64_t share = rate_bps / clients.size();
  std::lock_guard lock(mu_);
  auto& f = functions_[function];
  if (f.share_bps != share) f.buckets.clear();
  f.share_bps = share;
  f.clients = clients;
  for (auto it = f.buckets.begin(); it != f.buckets.end();) {
    if (std::find(clients.begin(), clients.end(), it->first) == clients.end()) {
      it = f.buckets.erase(it);
    } else {
      ++it;
    }
  }
  for (auto& c : clients) {
    auto& e = f.buckets[c];
    // Burst: one second of tokens at the client's share.
    if (!e.bucket) e.bucket = std::make_shared<TokenBucket>(share, share / 8);
  }
}

void RateLimiter::acquire(const std::string& function, const std::string& client, std::uint64_t n_bytes) {
  if (n_bytes == 0) return;
  std::shared_ptr<TokenBucket> bucket;
  {
    std::lock_guard lock(mu_);
    auto f = functions_.find(function);
    if (f == functions_.end()) throw Error(Errc::kUnknownFunction, function);
    auto e = f->second.buckets.find(client);
    if (e == f->second.buckets.end()) throw Error(Errc::kUnknownFunction, function + "/" + client);
    bucket = e->second.bucket;
  }
  bucket->acquire(n_bytes);
  std::lock_guard lock(mu_);
  auto& f = functions_[function];
  auto e = f.buckets.find(client);
  if (e == f.buckets.end()) return;
  auto now = now_us();
  auto& s = e->second.stats;
  if (s.first_us == 0) s.first_us = now;
  s.last_us = now;
  s.bytes += n_bytes;
}

std::string RateLimiter::client_for(const std::string& function, const std::string& bucket) const {
  std::lock_guard lock(mu_);
  auto f = functions_.find(function);
  if (f == functions_.end()) throw Error(Errc::kUnknownFunction, function);
  const auto& clients = f->second.clients;
  if (std::find(clients.begin(), clients.end(), bucket) != clients.end()) return bucket;
  return clients.front();
}

std::uint64_t RateLimiter::share_bps(const std::string& function) const {
  std::lock_guard lock(mu_);
  auto f = functions_.find(function);
  return f == functions_.end() ? 0 : f->second.share_bps;
}

RateLimiter::ClientStats RateLimiter::stats(const std::string& function, const std::string& client) const {
  std::lock_guard lock(mu_);
  auto f = functions_.find(function);
  if (f == functions_.end()) return {};
  auto e = f->second.buckets.find(client);
  return e == f->second.buckets.end() ? ClientStats{} : e->second.stats;
}

}  // namespace nexus::backend
