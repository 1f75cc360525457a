// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/common/token_bucket.hpp"

#include <algorithm>
#include <cmath>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"

namespace nexus {

TokenBucket::TokenBucket(std::uint64_t rate_bps, std::uint64_t burst_bytes, bool start_full)
    : rate_bps_(rate_bps),
      burst_bytes_(std::max<std::uint64_t>(burst_bytes, 1)),
      tokens_(start_full ? static_cast<double>(burst_bytes_) : 0.0),
      last_us_(now_us()) {
  if (rate_bps == 0) throw Error(Errc::kSchemaError, "rate_limit_bps must be > 0");
}

std::uint64_t TokenBucket::reserve(std::uint64_t n_bytes) {
  std::lock_guard lock(mu_);
  const auto now = now_us();
  const double bytes_per_us = static_cast<double>(rate_bps_) / 8.0 / 1e6;
  tokens_ = std::min(static_cast<double>(burst_bytes_),
                     tokens_ + static_cast<double>(now - last_us_) * bytes_per_us);
  last_us_ = now;
  tokens_ -= static_cast<double>(n_bytes);
  if (tokens_ >= 0) return now;
  return now + static_cast<std::uint64_t>(std::ceil(-tokens_ / bytes_per_us));
}

void TokenBucket::acquire(std::uint64_t n_bytes) {
  while (n_bytes > 0) {
    auto piece = std::min(n_bytes, burst_bytes_);
    sleep_until_us(reserve(piece));
    n_bytes -= piece;
  }
}

}  // namespace nexus
