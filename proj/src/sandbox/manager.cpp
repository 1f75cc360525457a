// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/sandbox/manager.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"

namespace nexus::sandbox {

SandboxManager::SandboxManager(ManagerConfig cfg, TransitionObserver observer)
    : cfg_(std::move(cfg)), observer_(std::move(observer)) {
  if (cfg_.sandbox_binary.empty()) {
    auto found = sibling_executable("nexus-sandbox");
    if (!found) throw Error(Errc::kSpawnError, "no sandbox binary configured and none found next to this executable");
    cfg_.sandbox_binary = *found;
  }
  std::filesystem::create_directories(cfg_.region_dir);
}

SandboxManager::~SandboxManager() { shutdown(); }

SandboxManager::Acquired SandboxManager::acquire(const std::string& function, Mode mode,
                                                 const RestoreModel& model,
                                                 const std::vector<std::string>& guest_args) {
  for (;;) {
    SandboxPtr warm;
    {
      std::lock_guard lock(mu_);
      auto it = pool_.find(function);
      if (it == pool_.end() || it->second.empty()) break;
      warm = std::move(it->second.front());
      it->second.pop_front();
    }
    // A pooled guest never speaks first; anything readable means it died.
    if (warm->control.readable()) {
      spdlog::warn("sandbox {} died while pooled", warm->id);
      warm->life.to(State::kDraining);
      retire(warm);
      continue;
    }
    warm->slots->reset();
    return {std::move(warm), false};
  }

  const std::uint64_t id = cfg_.id_base | next_id_.fetch_add(1);
  auto sb = std::make_shared<Sandbox>(id, function, mode, observer_);
  sb->region = shmem::create_region(cfg_.region_dir, id, cfg_.region_bytes, shmem::RegionMode::kRing,
                                    cfg_.limits);
  sb->slots = std::make_unique<shmem::SlotAllocator>(sb->region);
  auto sock = cfg_.region_dir / fmt::format("nexus-ctl-{}.sock", id);
  sb->control_listener = net::Listener::bind(net::Endpoint::unix_path(sock.string()));

  sb->restore_started_us = now_us();
  sb->ready_deadline_us = sb->restore_started_us + model.restore_us(mode);
  std::vector<std::string> args{"--control",   sb->control_listener.endpoint().to_string(),
                                "--region",    sb->region.path().string(),
                                "--function",  function,
                                "--mode",      std::string(mode_name(mode)),
                                "--ready-at",  std::to_string(sb->ready_deadline_us)};
  args.insert(args.end(), guest_args.begin(), guest_args.end());
  try {
    // Guests that take no flags (other-language frontends) read these.
    sb->process = spawn(cfg_.sandbox_binary, args,
                        {{"NEXUS_CONTROL", sb->control_listener.endpoint().to_string()},
                         {"NEXUS_REGION", sb->region.path().string()},
                         {"NEXUS_FUNCTION", function},
                         {"NEXUS_MODE", std::string(mode_name(mode))},
                         {"NEXUS_READY_AT", std::to_string(sb->ready_deadline_us)}});
  } catch (...) {
    sb->life.to(State::kDraining);
    sb->life.to(State::kReleased);
    throw;
  }
  sb->counted = true;
  live_++;
  return {std::move(sb), true};
}

void SandboxManager::wait_ready(Sandbox& sb) {
  using namespace std::chrono;
  const std::uint64_t give_up = sb.ready_deadline_us + cfg_.spawn_timeout_us;
  while (!sb.control.valid()) {
    auto now = now_us();
    if (now >= give_up) {
      throw Error(Errc::kProvisionFailed, fmt::format("sandbox {} did not attach in time", sb.id));
    }
    // Short accept slices so an early guest exit is noticed promptly.
    auto slice = std::min<std::uint64_t>(give_up - now, 50'000);
    auto conn = sb.control_listener.accept(duration_cast<milliseconds>(microseconds(slice)) + 1ms);
    if (conn) {
      sb.control = std::move(*conn);
      break;
    }
    if (sb.process.try_wait()) {
      throw Error(Errc::kProvisionFailed, fmt::format("sandbox {} exited during restore", sb.id));
    }
  }
  // The control socket is single-use; the path is no longer needed.
  std::error_code ec;
  std::filesystem::remove(sb.control_listener.endpoint().path, ec);
  sb.control_listener = net::Listener();
  sb.restored_at_us = now_us();
  sb.life.to(State::kReady);
}

void SandboxManager::begin(Sandbox& sb) {
  sb.life.to(State::kBusy);
  sb.invocations++;
}

void SandboxManager::release_early(const SandboxPtr& sb, bool healthy) {
  if (sb->life.state() != State::kBusy) {
    throw Error(Errc::kIllegalState,
                fmt::format("sandbox {} is {}, not Busy", sb->id, state_name(sb->life.state())));
  }
  if (healthy) {
    std::lock_guard lock(mu_);
    auto& q = pool_[sb->function];
    if (q.size() < cfg_.warm_pool_per_function) {
      sb->life.to(State::kReady);
      q.push_back(sb);
      return;
    }
  }
  sb->life.to(State::kDraining);
  retire(sb);
}

void SandboxManager::discard(const SandboxPtr& sb) {
  auto s = sb->life.state();
  if (s == State::kReleased) return;
  if (s != State::kDraining) sb->life.to(State::kDraining);
  retire(sb);
}

void SandboxManager::retire(const SandboxPtr& sb) {
  sb->control.shutdown();
  sb->control.close();
  if (sb->control_listener.valid()) {
    std::error_code ec;
    std::filesystem::remove(sb->control_listener.endpoint().path, ec);
    sb->control_listener = net::Listener();
  }
  sb->process.kill_and_wait();
  if (std::exchange(sb->counted, false)) live_--;
  sb->released_at_us = now_us();
  sb->life.to(State::kReleased);
  // The region file itself goes away with the last SandboxPtr.
}

std::size_t SandboxManager::warm_count(const std::string& function) const {
  std::lock_guard lock(mu_);
  auto it = pool_.find(function);
  return it == pool_.end() ? 0 : it->second.size();
}

void SandboxManager::shutdown() {
  std::map<std::string, std::deque<SandboxPtr>> pool;
  {
    std::lock_guard lock(mu_);
    pool.swap(pool_);
  }
  for (auto& [fn, q] : pool) {
    for (auto& sb : q) {
      sb->life.to(State::kDraining);
      retire(sb);
    }
  }
}

}  // namespace nexus::sandbox
