// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/harness/ingress_client.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/proto/frame.hpp"

namespace nexus::harness {

InvokeOutcome IngressClient::invoke(proto::InvocationEnvelope env) const {
  if (env.invocation_id.is_zero()) env.invocation_id = Id128::random();
  if (env.idempotency_key.is_zero()) env.idempotency_key = Id128::random();
  const auto body = proto::serialize_envelope(env);
  const auto deadline = now_us() + policy_.budget_us;
  auto backoff = policy_.first_backoff_us;
  InvokeOutcome out;
  std::string last_error;
  for (;;) {
    bool sent = false;
    try {
      auto conn = net::connect(ep_);
      proto::write_frame(conn, proto::MessageType::kIngressInvoke, as_bytes(body));
      sent = true;
      out.attempts++;
      for (;;) {
        auto f = proto::read_frame(conn);
        if (!f) throw Error(Errc::kTransportError, "backend closed the connection");
        if (f->type != proto::MessageType::kIngressResponse) continue;
        out.response = proto::parse_response(f->body);
        if (out.response.invocation_id.is_zero()) {
          // Rejected before an id was read back (malformed envelope).
          out.response.invocation_id = env.invocation_id;
          out.response.idempotency_key = env.idempotency_key;
        }
        return out;
      }
    } catch (const Error& e) {
      if (e.code() != Errc::kTransportError && e.code() != Errc::kTruncatedFrame) throw;
      last_error = e.what();
      spdlog::debug("invocation {} {}: {}", env.invocation_id.hex(), sent ? "lost" : "not sent", last_error);
    }
    if (now_us() + backoff > deadline) break;
    sleep_until_us(now_us() + backoff);
    backoff = std::min(backoff * 2, policy_.max_backoff_us);
  }
  out.response = {};
  out.response.invocation_id = env.invocation_id;
  out.response.idempotency_key = env.idempotency_key;
  out.response.error = fmt::format("retry budget exhausted after {} attempts: {}", out.attempts, last_error);
  return out;
}

std::string IngressClient::status() const {
  auto conn = net::connect(ep_);
  proto::write_frame(conn, proto::MessageType::kIngressStatusReq, {});
  for (;;) {
    auto f = proto::read_frame(conn);
    if (!f) throw Error(Errc::kTransportError, "backend closed the connection");
    if (f->type == proto::MessageType::kIngressStatus) return std::string(as_chars(f->body));
  }
}

}  // namespace nexus::harness
