// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nexus/frontend/direct_client.hpp"
#include "nexus/sandbox/mode.hpp"
#include "nexus/sandbox/restore.hpp"
#include "nexus/shmem/region.hpp"

namespace nexus::backend {

struct FunctionConfig {
  std::string name;
  std::uint64_t rate_limit_bps = 600'000'000;
  std::string credentials_token;
  /// Storage clients sharing the function's rate equally. A transfer uses
  /// the client named like the object's bucket, else the first one.
  std::vector<std::string> clients{"s3"};
  sandbox::RestoreModel restore;
};

struct BackendConfig {
  sandbox::Mode mode = sandbox::Mode::kOffloadedAsync;
  std::string listen_ingress = "127.0.0.1:0";
  std::string store = "127.0.0.1:9000";
  std::filesystem::path region_dir = "/dev/shm/nexus";
  std::string sandbox_binary;  // empty: next to the running executable

  std::size_t max_active_sandboxes = 128;
  std::size_t warm_pool_per_function = 4;
  std::uint64_t region_cap_bytes = shmem::kDefaultRegionCap;
  std::uint64_t ring_capacity_bytes = shmem::kDefaultRingCapacity;
  std::uint64_t max_object_bytes = 256ull << 20;
  std::uint32_t writeback_retries = 2;
  std::uint64_t writeback_backoff_us = 20'000;
  std::uint64_t spawn_timeout_us = 10'000'000;
  bool verify_checksums = false;
  bool capture_frames = false;

  frontend::FabricCost fabric;  // coupled guests only
  /// Restore model for functions that do not set their own.
  sandbox::RestoreModel default_restore;
  std::vector<FunctionConfig> functions;

  const FunctionConfig* find(const std::string& name) const;
  /// Throws SchemaError on inconsistent values.
  void validate() const;
};

/// Parses the JSON config; absent keys keep their defaults. Throws
/// SchemaError naming the offending key.
BackendConfig parse_config(std::string_view json_text);
BackendConfig load_config(const std::filesystem::path& path);
std::string dump_config(const BackendConfig& cfg);

}  // namespace nexus::backend
