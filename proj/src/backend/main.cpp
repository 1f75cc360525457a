// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include "nexus/backend/backend.hpp"
#include "nexus/common/error.hpp"

namespace nexus::backend {

int backend_main(int argc, char** argv) {
  CLI::App app{"Nexus host backend"};
  std::string config_path, listen, store, region_dir, mode, kill_at, metrics_out, log_level = "info";
  std::uint32_t kill_after = 1;
  app.add_option("--config", config_path, "JSON config file (see CONFIG.md)")->required();
  app.add_option("--listen-ingress", listen, "Ingress endpoint, host:port or unix:<path>");
  app.add_option("--store", store, "Object store endpoint");
  app.add_option("--region-dir", region_dir, "Directory for region files and control sockets");
  app.add_option("--mode", mode, "offloaded | offloaded-async | coupled");
  app.add_option("--kill-at", kill_at, "Crash at a fault point: during-prefetch | post-fn-response-pre-ack");
  app.add_option("--kill-after", kill_after, "Crash on the n-th time the fault point is reached");
  app.add_option("--metrics-out", metrics_out, "Write the status JSON here on shutdown");
  app.add_option("--log-level", log_level);
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));
  net::ignore_sigpipe();

  // Signals are handled synchronously on this thread; workers never see them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGHUP);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGINT);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  auto load = [&] {
    auto cfg = load_config(config_path);
    if (!listen.empty()) cfg.listen_ingress = listen;
    if (!store.empty()) cfg.store = store;
    if (!region_dir.empty()) cfg.region_dir = region_dir;
    if (!mode.empty()) cfg.mode = sandbox::parse_mode(mode);
    return cfg;
  };

  try {
    Backend be(load());
    if (!kill_at.empty()) be.faults().arm(parse_fault_point(kill_at), kill_after);
    be.start();
    // Supervisors read the bound endpoint from stdout.
    std::cout << "listening " << be.ingress_endpoint().to_string() << std::endl;

    for (;;) {
      int sig = 0;
      if (sigwait(&set, &sig) != 0) continue;
      if (sig == SIGHUP) {
        try {
          be.reload(load());
        } catch (const std::exception& e) {
          spdlog::error("reload rejected: {}", e.what());
        }
        continue;
      }
      spdlog::info("signal {}: shutting down", sig);
      auto status = be.status_json();
      if (!metrics_out.empty()) {
        std::ofstream(metrics_out) << status << '\n';
      } else {
        std::cout << status << std::endl;
      }
      be.stop();
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("backend: {}", e.what());
    return 1;
  }
}

}  // namespace nexus::backend
