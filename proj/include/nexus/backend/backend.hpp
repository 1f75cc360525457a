// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "nexus/backend/admission.hpp"
#include "nexus/backend/config.hpp"
#include "nexus/backend/credentials.hpp"
#include "nexus/backend/faults.hpp"
#include "nexus/backend/metrics.hpp"
#include "nexus/backend/rate_limiter.hpp"
#include "nexus/common/task_set.hpp"
#include "nexus/net/socket.hpp"
#include "nexus/proto/envelope.hpp"
#include "nexus/proto/ingress.hpp"
#include "nexus/sandbox/manager.hpp"
#include "nexus/store/client.hpp"

namespace nexus::backend {

class Invocation;

/// The trusted host daemon. Terminates ingress invocations, provisions
/// sandboxes while prefetching their inputs, serves remoted GET/PUT over
/// shared memory, drives asynchronous writeback and releases buffered
/// responses. Holds all credentials. Crash-only: all state is in memory
/// and a restart begins from a clean region directory.
class Backend {
 public:
  explicit Backend(BackendConfig cfg);
  ~Backend();
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  /// Removes stale region files, binds the ingress endpoint and starts
  /// accepting.
  void start();
  void stop();
  const net::Endpoint& ingress_endpoint() const noexcept { return listener_.endpoint(); }

  /// Applies a new config: functions, tokens and rate limits. Invocations
  /// admitted afterwards see the new values.
  void reload(BackendConfig cfg);

  /// Runs one invocation to completion on the calling thread and returns
  /// its response. The ingress path uses the same entry point.
  proto::IngressResponse invoke(proto::InvocationEnvelope env);
  /// Starts an invocation; `done` receives exactly one response.
  void submit(proto::InvocationEnvelope env, std::function<void(proto::IngressResponse)> done);

  /// Metrics, rate-limiter and credential fingerprints as JSON.
  std::string status_json() const;

  Metrics& metrics() noexcept { return metrics_; }
  FrameCapture& capture() noexcept { return capture_; }
  FaultInjector& faults() noexcept { return faults_; }
  CredentialStore& credentials() noexcept { return creds_; }
  RateLimiter& rate_limiter() noexcept { return limiter_; }
  sandbox::SandboxManager& sandboxes() noexcept { return *manager_; }
  std::shared_ptr<const BackendConfig> config() const;

  /// Observes every sandbox state transition (property tests).
  void set_transition_observer(sandbox::TransitionObserver obs);

 private:
  friend class Invocation;

  void accept_loop();
  void serve_ingress(std::shared_ptr<struct IngressConn> conn);
  void run(std::shared_ptr<Invocation> inv);
  void apply_functions(const BackendConfig& cfg);
  void track(const sandbox::SandboxPtr& sb, bool add);
  void cleanup_stale_files();

  mutable std::mutex cfg_mu_;
  std::shared_ptr<const BackendConfig> cfg_;

  Metrics metrics_;
  FrameCapture capture_;
  FaultInjector faults_;
  CredentialStore creds_;
  RateLimiter limiter_;
  std::unique_ptr<store::StoreClient> store_;
  std::unique_ptr<sandbox::SandboxManager> manager_;
  Admission admission_;

  std::mutex observer_mu_;
  sandbox::TransitionObserver observer_;

  net::Listener listener_;
  std::thread acceptor_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};
  std::mutex conns_mu_;
  std::set<std::shared_ptr<struct IngressConn>> conns_;
  TaskSet tasks_;
  std::mutex busy_mu_;
  std::set<sandbox::SandboxPtr> busy_;
};

/// `backend` command-line entry point.
int backend_main(int argc, char** argv);

}  // namespace nexus::backend
