// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/harness/cluster.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <fstream>

#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/frontend/handler.hpp"

namespace nexus::harness {

namespace {

std::filesystem::path make_work_dir(const std::filesystem::path& root) {
  static std::atomic<std::uint32_t> counter{0};
  auto base = std::filesystem::exists(root) ? root : std::filesystem::temp_directory_path();
  auto dir = base / fmt::format("nexus-h{}-{}-{}", ::getpid(), now_us() % 1'000'000, counter++);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

Cluster::Cluster(ClusterOptions opt) : opt_(std::move(opt)), dir_(make_work_dir(opt_.work_root)), store_(opt_.store) {
  net::ignore_sigpipe();
  store_.start(net::Endpoint::parse("127.0.0.1:0"));
  auto& cfg = opt_.backend;
  cfg.store = store_.endpoint().to_string();
  cfg.region_dir = dir_ / "regions";
  cfg.listen_ingress = "unix:" + (dir_ / "ingress.sock").string();
  if (cfg.sandbox_binary.empty()) cfg.sandbox_binary = sandbox::sibling_executable("nexus-sandbox").value_or("");
  ingress_ = net::Endpoint::parse(cfg.listen_ingress);

  if (!opt_.supervised) {
    backend_ = std::make_unique<backend::Backend>(cfg);
    backend_->start();
    return;
  }
  if (opt_.backend_binary.empty()) opt_.backend_binary = sandbox::sibling_executable("backend").value_or("backend");
  {
    std::ofstream(dir_ / "backend.json") << backend::dump_config(cfg);
  }
  auto first = launch(0);
  pid_ = first.detach();
  supervisor_ = std::thread([this] { supervise(); });
  wait_serving();
}

Cluster::~Cluster() { stop(); }

sandbox::Process Cluster::launch(std::size_t incarnation) {
  std::vector<std::string> args{"--config", (dir_ / "backend.json").string(), "--log-level", "warn",
                                "--metrics-out", (dir_ / fmt::format("metrics-{}.json", incarnation)).string()};
  if (incarnation < opt_.faults.size()) {
    auto& f = opt_.faults[incarnation];
    args.insert(args.end(), {"--kill-at", std::string(backend::fault_point_name(f.point)), "--kill-after",
                             std::to_string(f.nth)});
  }
  return sandbox::spawn(opt_.backend_binary, args);
}

void Cluster::supervise() {
  for (std::size_t incarnation = 0;; ++incarnation) {
    pid_t pid;
    {
      std::lock_guard lock(proc_mu_);
      pid = pid_;
    }
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    std::unique_lock lock(proc_mu_);
    pid_ = -1;
    if (stopping_) break;
    spdlog::info("backend incarnation {} died ({}); restarting", incarnation,
                 WIFSIGNALED(status) ? fmt::format("signal {}", WTERMSIG(status))
                                     : fmt::format("exit {}", WEXITSTATUS(status)));
    restarts_++;
    try {
      pid_ = launch(incarnation + 1).detach();
    } catch (const Error& e) {
      spdlog::error("backend restart failed: {}", e.what());
      break;
    }
    proc_cv_.notify_all();
  }
  proc_cv_.notify_all();
}

void Cluster::wait_serving(std::uint64_t timeout_us) const {
  const auto deadline = now_us() + timeout_us;
  for (;;) {
    try {
      net::connect(ingress_);
      return;
    } catch (const Error&) {
      if (now_us() > deadline) throw Error(Errc::kTransportError, "backend did not come up at " + ingress_.to_string());
      sleep_until_us(now_us() + 5'000);
    }
  }
}

void Cluster::seed(const std::map<proto::ObjectRef, std::uint64_t>& objects) {
  for (auto& [ref, size] : objects) store_.objects().put(ref, frontend::synthetic_payload(ref, size));
}

void Cluster::stop() {
  if (std::exchange(stopped_, true)) return;
  if (backend_) {
    backend_->stop();
    backend_.reset();
  }
  if (supervisor_.joinable()) {
    stopping_ = true;
    {
      std::lock_guard lock(proc_mu_);
      if (pid_ > 0) ::kill(pid_, SIGTERM);
    }
    supervisor_.join();
  }
  store_.stop();
  std::error_code ec;
  std::filesystem::remove_all(dir_, ec);
}

}  // namespace nexus::harness
