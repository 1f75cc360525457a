// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/metrics.hpp"

#include <json.hpp>

#include <algorithm>

namespace nexus::backend {

std::string Metrics::to_json() const {
  nlohmann::json j;
#define NEXUS_METRIC(name) j[#name] = name.load()
  NEXUS_METRIC(invocations);
  NEXUS_METRIC(responses_ok);
  NEXUS_METRIC(responses_error);
  NEXUS_METRIC(cold_starts);
  NEXUS_METRIC(warm_starts);
  NEXUS_METRIC(prefetches);
  NEXUS_METRIC(prefetch_failures);
  NEXUS_METRIC(prefetch_hits);
  NEXUS_METRIC(hint_mismatches);
  NEXUS_METRIC(sync_slot_gets);
  NEXUS_METRIC(ring_gets);
  NEXUS_METRIC(ring_puts);
  NEXUS_METRIC(sync_puts);
  NEXUS_METRIC(async_puts);
  NEXUS_METRIC(write_retries);
  NEXUS_METRIC(write_failures);
  NEXUS_METRIC(store_gets);
  NEXUS_METRIC(store_puts);
  NEXUS_METRIC(slot_bytes_written);
  NEXUS_METRIC(ring_bytes);
  NEXUS_METRIC(checksum_failures);
  NEXUS_METRIC(peak_ring_fill);
  NEXUS_METRIC(peak_active);
  NEXUS_METRIC(active);
  NEXUS_METRIC(queued);
#undef NEXUS_METRIC
  return j.dump();
}

void Metrics::raise_peak(std::atomic<std::uint64_t>& peak, std::uint64_t v) noexcept {
  auto cur = peak.load();
  while (v > cur && !peak.compare_exchange_weak(cur, v)) {
  }
}

void FrameCapture::record(std::uint64_t sandbox_id, bool to_sandbox, proto::MessageType type, ByteSpan body) {
  if (!enabled_) return;
  std::lock_guard lock(mu_);
  entries_.push_back({sandbox_id, to_sandbox, type, Bytes(body.begin(), body.end())});
}

std::vector<FrameCapture::Entry> FrameCapture::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t FrameCapture::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::size_t FrameCapture::count_containing(ByteSpan needle) const {
  if (needle.empty()) return 0;
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (auto& e : entries_) {
    auto frame = proto::encode_frame(e.type, e.body);
    if (std::search(frame.begin(), frame.end(), needle.begin(), needle.end()) != frame.end()) ++n;
  }
  return n;
}

void FrameCapture::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

}  // namespace nexus::backend
