// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/backend.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <future>

#include "invocation.hpp"
#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"

namespace nexus::backend {

struct IngressConn {
  net::Stream stream;
  std::mutex write_mu;

  void reply(proto::MessageType type, const std::string& body) {
    std::lock_guard lock(write_mu);
    try {
      proto::write_frame(stream, type, as_bytes(body));
    } catch (const Error& e) {
      spdlog::debug("ingress reply dropped: {}", e.what());
    }
  }
};

namespace {

sandbox::ManagerConfig manager_config(const BackendConfig& cfg) {
  sandbox::ManagerConfig m;
  m.region_dir = cfg.region_dir;
  m.sandbox_binary = cfg.sandbox_binary;
  if (m.sandbox_binary.empty()) m.sandbox_binary = sandbox::sibling_executable("nexus-sandbox").value_or("nexus-sandbox");
  m.limits = {cfg.region_cap_bytes, cfg.ring_capacity_bytes};
  // Slot area gets whatever the cap leaves after the ring and its control page.
  m.region_bytes = cfg.region_cap_bytes - cfg.ring_capacity_bytes - shmem::kPageBytes;
  m.warm_pool_per_function = cfg.warm_pool_per_function;
  m.spawn_timeout_us = cfg.spawn_timeout_us;
  // Seconds-of-day in the high digits keep ids unique across restarts.
  m.id_base = (now_us() % 1'000'000'000ull) * 1'000'000ull;
  return m;
}

}  // namespace

Backend::Backend(BackendConfig cfg) : admission_(cfg.max_active_sandboxes) {
  cfg.validate();
  apply_functions(cfg);
  capture_.enable(cfg.capture_frames);
  store_ = std::make_unique<store::StoreClient>(net::Endpoint::parse(cfg.store));
  manager_ = std::make_unique<sandbox::SandboxManager>(manager_config(cfg), [this](const sandbox::Transition& t) {
    sandbox::TransitionObserver obs;
    {
      std::lock_guard lock(observer_mu_);
      obs = observer_;
    }
    if (obs) obs(t);
  });
  cfg_ = std::make_shared<const BackendConfig>(std::move(cfg));
}

Backend::~Backend() { stop(); }

void Backend::apply_functions(const BackendConfig& cfg) {
  for (auto& fn : cfg.functions) {
    limiter_.configure(fn.name, fn.rate_limit_bps, fn.clients);
    creds_.set(fn.name, fn.credentials_token);
  }
  // Functions dropped from the config lose their credentials.
  for (auto& [name, fp] : creds_.fingerprints()) {
    if (cfg.find(name) == nullptr) creds_.erase(name);
  }
}

std::shared_ptr<const BackendConfig> Backend::config() const {
  std::lock_guard lock(cfg_mu_);
  return cfg_;
}

void Backend::reload(BackendConfig cfg) {
  cfg.validate();
  apply_functions(cfg);
  capture_.enable(cfg.capture_frames);
  admission_.set_capacity(cfg.max_active_sandboxes);
  std::lock_guard lock(cfg_mu_);
  cfg_ = std::make_shared<const BackendConfig>(std::move(cfg));
  spdlog::info("config reloaded: {} functions", cfg_->functions.size());
}

void Backend::set_transition_observer(sandbox::TransitionObserver obs) {
  std::lock_guard lock(observer_mu_);
  observer_ = std::move(obs);
}

void Backend::cleanup_stale_files() {
  // Crash-only restart: whatever a previous instance left is garbage.
  std::error_code ec;
  const auto dir = config()->region_dir;
  std::filesystem::create_directories(dir, ec);
  for (auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    auto name = entry.path().filename().string();
    if (name.rfind("nexus-region-", 0) == 0 || name.rfind("nexus-ctl-", 0) == 0) {
      std::filesystem::remove(entry.path(), ec);
    }
  }
}

void Backend::start() {
  if (running_.exchange(true)) return;
  cleanup_stale_files();
  listener_ = net::Listener::bind(net::Endpoint::parse(config()->listen_ingress));
  acceptor_ = std::thread([this] { accept_loop(); });
  spdlog::info("backend listening on {} (mode {})", listener_.endpoint().to_string(),
               sandbox::mode_name(config()->mode));
}

void Backend::stop() {
  stopping_ = true;
  // Wakes invocations queued for admission; they see stopping_ and fail.
  admission_.set_capacity(static_cast<std::size_t>(-1));
  if (!running_.exchange(false)) {
    tasks_.join_all();
    manager_->shutdown();
    return;
  }
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(conns_mu_);
    for (auto& c : conns_) c->stream.shutdown();
  }
  {
    // Unblocks invocations waiting on their guests.
    std::lock_guard lock(busy_mu_);
    for (auto& sb : busy_) sb->control.shutdown();
  }
  tasks_.join_all();
  manager_->shutdown();
}

void Backend::accept_loop() {
  while (running_) {
    auto s = listener_.accept();
    if (!s) continue;
    auto conn = std::make_shared<IngressConn>();
    conn->stream = std::move(*s);
    {
      std::lock_guard lock(conns_mu_);
      conns_.insert(conn);
    }
    tasks_.spawn([this, conn] { serve_ingress(conn); });
  }
}

void Backend::serve_ingress(std::shared_ptr<IngressConn> conn) {
  for (;;) {
    std::optional<proto::Frame> f;
    try {
      f = proto::read_frame(conn->stream);
    } catch (const Error& e) {
      spdlog::debug("ingress connection dropped: {}", e.what());
    }
    if (!f) break;
    switch (f->type) {
      case proto::MessageType::kIngressInvoke: {
        proto::InvocationEnvelope env;
        try {
          env = proto::parse_envelope(f->body, config()->max_object_bytes);
        } catch (const Error& e) {
          proto::IngressResponse r;
          r.error = e.what();
          metrics_.responses_error++;
          conn->reply(proto::MessageType::kIngressResponse, proto::serialize_response(r));
          break;
        }
        submit(std::move(env), [conn](proto::IngressResponse r) {
          conn->reply(proto::MessageType::kIngressResponse, proto::serialize_response(r));
        });
        break;
      }
      case proto::MessageType::kIngressStatusReq:
        conn->reply(proto::MessageType::kIngressStatus, status_json());
        break;
      default: {
        proto::ErrorMsg err{static_cast<std::uint8_t>(f->type),
                            fmt::format("{} is not accepted on the ingress endpoint",
                                        proto::message_type_name(f->type))};
        auto body = err.encode();
        std::lock_guard lock(conn->write_mu);
        try {
          proto::write_frame(conn->stream, proto::MessageType::kError, body);
        } catch (const Error&) {
        }
      }
    }
  }
  std::lock_guard lock(conns_mu_);
  conns_.erase(conn);
}

void Backend::submit(proto::InvocationEnvelope env, std::function<void(proto::IngressResponse)> done) {
  auto inv = std::make_shared<Invocation>(*this, std::move(env), std::move(done));
  tasks_.spawn([this, inv] { run(inv); });
}

void Backend::run(std::shared_ptr<Invocation> inv) { inv->run(); }

proto::IngressResponse Backend::invoke(proto::InvocationEnvelope env) {
  std::promise<proto::IngressResponse> p;
  auto fut = p.get_future();
  auto inv = std::make_shared<Invocation>(*this, std::move(env),
                                          [&p](proto::IngressResponse r) { p.set_value(std::move(r)); });
  inv->run();
  return fut.get();
}

void Backend::track(const sandbox::SandboxPtr& sb, bool add) {
  std::lock_guard lock(busy_mu_);
  if (add) {
    busy_.insert(sb);
  } else {
    busy_.erase(sb);
  }
}

std::string Backend::status_json() const {
  auto cfg = config();
  nlohmann::json j;
  j["metrics"] = nlohmann::json::parse(metrics_.to_json());
  j["mode"] = std::string(sandbox::mode_name(cfg->mode));
  j["live_sandboxes"] = manager_->live_count();
  j["admission"] = {{"active", admission_.active()}, {"waiting", admission_.waiting()}};
  auto& fns = j["functions"] = nlohmann::json::object();
  for (auto& fn : cfg->functions) {
    auto& f = fns[fn.name];
    f["rate_limit_bps"] = fn.rate_limit_bps;
    f["share_bps"] = limiter_.share_bps(fn.name);
    f["warm"] = manager_->warm_count(fn.name);
    f["token_fingerprint"] = creds_.fingerprint(fn.name);
    auto& clients = f["clients"] = nlohmann::json::object();
    for (auto& c : fn.clients) {
      auto s = limiter_.stats(fn.name, c);
      clients[c] = {{"bytes", s.bytes}, {"first_us", s.first_us}, {"last_us", s.last_us}};
    }
  }
  return j.dump();
}

}  // namespace nexus::backend
