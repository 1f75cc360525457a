// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "nexus/net/socket.hpp"
#include "nexus/proto/envelope.hpp"
#include "nexus/proto/ingress.hpp"

namespace nexus::harness {

/// How long the ingress keeps retrying an invocation whose connection broke
/// before a response arrived.
struct RetryPolicy {
  std::uint64_t budget_us = 30'000'000;
  std::uint64_t first_backoff_us = 10'000;
  std::uint64_t max_backoff_us = 250'000;
};

struct InvokeOutcome {
  proto::IngressResponse response;
  std::uint32_t attempts = 0;  // connections that carried the envelope
};

/// Plays the cluster ingress. Each call uses its own connection; a broken
/// connection is retried with the same invocation id and idempotency key,
/// which is what makes at-least-once delivery survive a backend restart.
class IngressClient {
 public:
  explicit IngressClient(net::Endpoint ep, RetryPolicy policy = {}) : ep_(std::move(ep)), policy_(policy) {}

  /// Assigns ids when absent. After the retry budget the outcome carries a
  /// TransportError response.
  InvokeOutcome invoke(proto::InvocationEnvelope env) const;

  /// The backend's status JSON.
  std::string status() const;

  const net::Endpoint& endpoint() const noexcept { return ep_; }

 private:
  net::Endpoint ep_;
  RetryPolicy policy_;
};

}  // namespace nexus::harness
