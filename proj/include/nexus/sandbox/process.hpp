// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sys/types.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nexus::sandbox {

/// A child process. Destruction kills and reaps it.
class Process {
 public:
  Process() = default;
  explicit Process(pid_t pid) noexcept : pid_(pid) {}
  Process(Process&& other) noexcept : pid_(std::exchange(other.pid_, -1)) {}
  Process& operator=(Process&& other) noexcept;
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;
  ~Process() { kill_and_wait(); }

  pid_t pid() const noexcept { return pid_; }
  bool running() const noexcept { return pid_ > 0; }

  void signal(int sig) const noexcept;
  /// Non-blocking reap. Returns the wait status once the child has exited.
  std::optional<int> try_wait();
  int wait();
  void kill_and_wait() noexcept;
  /// Forgets the child without killing it.
  pid_t detach() noexcept { return std::exchange(pid_, -1); }

 private:
  pid_t pid_ = -1;
};

/// posix_spawn of `binary` with `args` (argv[0] is added) and the parent
/// environment extended by `env`. Throws SpawnError.
Process spawn(const std::string& binary, const std::vector<std::string>& args,
              const std::vector<std::pair<std::string, std::string>>& env = {});

/// Path of an executable next to the running one, if it exists.
std::optional<std::string> sibling_executable(const std::string& name);

}  // namespace nexus::sandbox
