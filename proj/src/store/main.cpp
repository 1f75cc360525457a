// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>

#include "nexus/store/server.hpp"

namespace nexus::store {

int store_main(int argc, char** argv) {
  CLI::App app{"S3-like object store emulator"};
  std::string listen = "127.0.0.1:9000";
  StoreProfile profile;
  app.add_option("--listen", listen, "host:port or unix:<path>");
  app.add_option("--latency-us", profile.one_way_latency_us, "Fixed per-request latency");
  app.add_option("--bandwidth-bps", profile.bandwidth_bps, "Per-request bandwidth in bits per second")
      ->check(CLI::PositiveNumber);
  app.add_option("--fail-next-puts", profile.fail_next_puts, "Fail this many PUTs, then recover");
  CLI11_PARSE(app, argc, argv);

  net::ignore_sigpipe();
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGINT);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  try {
    StoreServer server(profile);
    server.start(net::Endpoint::parse(listen));
    std::cout << "listening " << server.endpoint().to_string() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    return 0;
  } catch (const std::exception& e) {
    spdlog::error("store: {}", e.what());
    return 1;
  }
}

}  // namespace nexus::store
