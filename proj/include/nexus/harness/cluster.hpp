// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nexus/backend/backend.hpp"
#include "nexus/backend/faults.hpp"
#include "nexus/harness/ingress_client.hpp"
#include "nexus/sandbox/process.hpp"
#include "nexus/store/server.hpp"

namespace nexus::harness {

/// One crash: the backend incarnation that reaches `point` for the
/// `nth` time kills itself.
struct FaultSpec {
  backend::FaultPoint point = backend::FaultPoint::kPostFnResponsePreAck;
  std::uint32_t nth = 1;
};

struct ClusterOptions {
  /// Store, ingress and region directory are filled in by the cluster.
  backend::BackendConfig backend;
  store::StoreProfile store;
  /// Run the backend as a child process under a restarting supervisor.
  bool supervised = false;
  std::string backend_binary;  // default: `backend` next to this executable
  /// Supervised only. Each incarnation consumes the next entry; once the
  /// list is exhausted incarnations run without faults.
  std::vector<FaultSpec> faults;
  /// Parent of the per-cluster work directory.
  std::filesystem::path work_root = "/dev/shm";
};

/// A store plus a backend on one host, the unit every experiment runs on.
class Cluster {
 public:
  explicit Cluster(ClusterOptions opt);
  ~Cluster();
  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  store::StoreServer& store() noexcept { return store_; }
  const net::Endpoint& ingress() const noexcept { return ingress_; }
  IngressClient client(RetryPolicy policy = {}) const { return IngressClient(ingress_, policy); }
  /// Null when supervised.
  backend::Backend* backend() noexcept { return backend_.get(); }
  const backend::BackendConfig& config() const noexcept { return opt_.backend; }

  /// Stores the deterministic synthetic payload for each object.
  void seed(const std::map<proto::ObjectRef, std::uint64_t>& objects);

  /// Backend incarnations that died and were restarted.
  std::uint32_t restarts() const noexcept { return restarts_.load(); }
  const std::filesystem::path& work_dir() const noexcept { return dir_; }

  /// Blocks until the ingress accepts connections.
  void wait_serving(std::uint64_t timeout_us = 10'000'000) const;
  void stop();

 private:
  void supervise();
  sandbox::Process launch(std::size_t incarnation);

  ClusterOptions opt_;
  std::filesystem::path dir_;
  store::StoreServer store_;
  net::Endpoint ingress_;
  std::unique_ptr<backend::Backend> backend_;

  std::thread supervisor_;
  std::mutex proc_mu_;
  std::condition_variable proc_cv_;
  pid_t pid_ = -1;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint32_t> restarts_{0};
  bool stopped_ = false;
};

}  // namespace nexus::harness
