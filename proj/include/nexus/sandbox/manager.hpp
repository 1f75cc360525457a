// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "nexus/net/socket.hpp"
#include "nexus/sandbox/lifecycle.hpp"
#include "nexus/sandbox/mode.hpp"
#include "nexus/sandbox/process.hpp"
#include "nexus/sandbox/restore.hpp"
#include "nexus/shmem/region.hpp"

namespace nexus::sandbox {

/// One process-backed sandbox with its region and control channel.
struct Sandbox {
  Sandbox(std::uint64_t id, std::string function, Mode mode, TransitionObserver obs)
      : id(id), function(std::move(function)), mode(mode), life(id, std::move(obs)) {}

  const std::uint64_t id;
  const std::string function;
  const Mode mode;
  Lifecycle life;

  shmem::MappedRegion region;
  std::unique_ptr<shmem::SlotAllocator> slots;
  net::Listener control_listener;
  net::Stream control;
  Process process;

  std::uint64_t restore_started_us = 0;
  std::uint64_t ready_deadline_us = 0;
  std::uint64_t restored_at_us = 0;
  std::uint64_t released_at_us = 0;
  std::uint64_t invocations = 0;
  bool counted = false;  // included in SandboxManager::live_count
};

using SandboxPtr = std::shared_ptr<Sandbox>;

struct ManagerConfig {
  std::filesystem::path region_dir;
  std::string sandbox_binary;
  std::uint64_t region_bytes = shmem::kDefaultRegionCap;
  shmem::RegionLimits limits;
  std::size_t warm_pool_per_function = 4;
  /// Grace period beyond the restore deadline for the guest to connect.
  std::uint64_t spawn_timeout_us = 10'000'000;
  /// High bits of every sandbox id, so ids never repeat across restarts.
  std::uint64_t id_base = 0;
};

/// Provisions sandboxes, keeps a bounded warm pool per function, and
/// returns sandboxes to service early.
class SandboxManager {
 public:
  explicit SandboxManager(ManagerConfig cfg, TransitionObserver observer = {});
  ~SandboxManager();
  SandboxManager(const SandboxManager&) = delete;
  SandboxManager& operator=(const SandboxManager&) = delete;

  struct Acquired {
    SandboxPtr sandbox;
    bool cold = false;
  };

  /// Pops a Ready sandbox from the warm pool, or spawns one that restores
  /// in the background (state Restoring). `guest_args` are appended to the
  /// sandbox command line. Throws SpawnError.
  Acquired acquire(const std::string& function, Mode mode, const RestoreModel& model,
                   const std::vector<std::string>& guest_args);

  /// Blocks until a Restoring sandbox connects; Restoring->Ready.
  /// Throws ProvisionFailed on timeout or early exit.
  void wait_ready(Sandbox& sb);

  /// Ready->Busy.
  void begin(Sandbox& sb);

  /// Busy->Ready (back to the pool) or Busy->Draining->Released when the
  /// pool is full or the sandbox is unhealthy. Pending writes may still
  /// reference the region; they keep it mapped through their SandboxPtr.
  /// Throws IllegalState unless Busy.
  void release_early(const SandboxPtr& sb, bool healthy = true);

  /// Tears down a sandbox that never became Busy.
  void discard(const SandboxPtr& sb);

  std::size_t warm_count(const std::string& function) const;
  std::size_t live_count() const noexcept { return live_.load(); }
  /// Kills every pooled sandbox.
  void shutdown();

  const ManagerConfig& config() const noexcept { return cfg_; }

 private:
  void retire(const SandboxPtr& sb);

  ManagerConfig cfg_;
  TransitionObserver observer_;
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::size_t> live_{0};
  mutable std::mutex mu_;
  std::map<std::string, std::deque<SandboxPtr>> pool_;
};

}  // namespace nexus::sandbox
