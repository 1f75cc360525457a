// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/frontend/guest.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <memory>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/frontend/direct_client.hpp"
#include "nexus/frontend/handler.hpp"
#include "nexus/frontend/session.hpp"
#include "nexus/sandbox/mode.hpp"

namespace nexus::frontend {

namespace {

void serve(Session& session, ObjectClient& client) {
  while (auto inv = session.next_invocation()) {
    std::string payload, error;
    bool ok = true;
    try {
      payload = serialize_report(run_synthetic_handler(client, parse_handler_event(inv->event_body)));
    } catch (const std::exception& e) {
      ok = false;
      error = e.what();
    }
    try {
      session.respond(ok ? proto::Status::kOk : proto::Status::kError, as_bytes(payload), error);
    } catch (const Error& e) {
      spdlog::warn("respond failed: {}", e.what());
      return;
    }
  }
}

}  // namespace

int guest_main(int argc, char** argv) {
  CLI::App app{"nexus sandbox guest"};
  std::string control, region, function, mode_text = "offloaded-async", store;
  std::uint64_t ready_at = 0, attach_budget_ms = 2000;
  FabricCost fabric;
  app.add_option("--control", control, "control channel endpoint")->required();
  app.add_option("--region", region, "region file path")->required();
  app.add_option("--function", function, "function name")->required();
  app.add_option("--mode", mode_text, "coupled | offloaded | offloaded-async");
  app.add_option("--ready-at", ready_at, "monotonic µs at which restore completes");
  app.add_option("--store", store, "store endpoint (coupled mode)");
  app.add_option("--fabric-request-us", fabric.per_request_us, "guest fabric CPU per request");
  app.add_option("--fabric-mib-us", fabric.per_mib_us, "guest fabric CPU per MiB");
  app.add_option("--rate-bps", fabric.rate_bps, "guest NIC rate");
  app.add_option("--attach-budget-ms", attach_budget_ms, "connect retry budget");
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::warn);
  try {
    const auto mode = sandbox::parse_mode(mode_text);
    sleep_until_us(ready_at);
    AttachOptions opts;
    opts.retry_budget_us = attach_budget_ms * 1000;
    auto session = Session::attach(net::Endpoint::parse(control), region, opts);
    session->set_async_puts(mode == sandbox::Mode::kOffloadedAsync);

    std::unique_ptr<DirectStoreClient> direct;
    if (mode == sandbox::Mode::kCoupled) {
      if (store.empty()) throw Error(Errc::kSpawnError, "coupled mode needs --store");
      direct = std::make_unique<DirectStoreClient>(net::Endpoint::parse(store), fabric);
    }
    // Coupled guests keep the control channel only for INVOKE and FN_RESPONSE.
    auto pick = [&]() -> ObjectClient& { return direct ? static_cast<ObjectClient&>(*direct) : *session; };

    // Serve until the backend closes the channel, then try to re-attach
    // within the budget. A restarted backend never re-listens on an old
    // control path, so in practice an orphan exits here.
    for (;;) {
      serve(*session, pick());
      try {
        session = Session::attach(net::Endpoint::parse(control), region, opts);
        session->set_async_puts(mode == sandbox::Mode::kOffloadedAsync);
      } catch (const Error&) {
        break;
      }
    }
  } catch (const std::exception& e) {
    spdlog::error("guest {}: {}", function, e.what());
    return 1;
  }
  return 0;
}

}  // namespace nexus::frontend
