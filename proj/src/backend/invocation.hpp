// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "nexus/backend/backend.hpp"
#include "nexus/backend/writeback.hpp"
#include "nexus/proto/messages.hpp"
#include "nexus/shmem/ring.hpp"

namespace nexus::backend {

/// The sandbox's control channel broke; the invocation cannot continue.
/// Deliberately not an nexus::Error so store-error handlers never swallow it.
struct SandboxGone : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrefetchRecord {
  enum class State { kFetching, kFilled, kFailed, kSkipped };

  proto::InputHint hint;
  State state = State::kFetching;
  shmem::SlotGrant grant;
  proto::Status failure = proto::Status::kError;
  std::string error;
  std::uint64_t started_us = 0;
  std::uint64_t done_us = 0;
  store::StoreConnection* conn = nullptr;  // set while a transfer runs
  bool cancelled = false;
};

/// One invocation attempt, from admission to response release.
class Invocation : public std::enable_shared_from_this<Invocation> {
 public:
  using Done = std::function<void(proto::IngressResponse)>;

  Invocation(Backend& be, proto::InvocationEnvelope env, Done done);
  void run();

 private:
  // lifecycle
  void fail_early(const std::string& error);
  void abort(const std::string& error);
  void finish();
  void release_admission();
  void on_release(proto::IngressResponse& r);

  // control channel
  void send(proto::MessageType type, const Bytes& body);
  proto::Frame recv();
  void serve_session();

  // prefetch
  void start_prefetch();
  void prefetch_one(const std::shared_ptr<PrefetchRecord>& rec);
  std::shared_ptr<PrefetchRecord> find_prefetch(const proto::ObjectRef& ref);
  std::optional<std::string> prefetch_failure();
  void stop_prefetch();

  // data plane
  std::optional<shmem::SlotGrant> try_grant(std::uint64_t length);
  void fill_slot(store::StoreConnection& conn, const shmem::SlotGrant& g, const std::string& client);
  std::uint64_t write_slot(const proto::ObjectRef& ref, const shmem::SlotGrant& g,
                           const std::function<void()>& body_sent);
  void push_ring(shmem::RingView& ring, ByteSpan data);
  void handle_get(const proto::GetReq& req);
  void sync_get(const proto::GetReq& req);
  void handle_put(const proto::PutReq& req);
  void handle_ring_put(const proto::StreamOpen& open);
  void delegate(const proto::ObjectRef& ref, const shmem::SlotGrant& g);
  void drive_write(const std::shared_ptr<PendingWrite>& pw, const sandbox::SandboxPtr& sb);

  Backend& be_;
  proto::InvocationEnvelope env_;
  Done done_;
  std::shared_ptr<const BackendConfig> cfg_;
  FunctionConfig fn_;
  sandbox::Mode mode_ = sandbox::Mode::kOffloadedAsync;
  std::string token_;  // backend-internal; never sent to the sandbox

  sandbox::SandboxPtr sb_;
  bool cold_ = false;
  bool admitted_ = false;
  proto::Milestones ms_;
  std::uint64_t prefetch_done_us_ = 0;
  std::optional<proto::FnResponse> fn_resp_;

  std::mutex pf_mu_;
  std::condition_variable pf_cv_;
  std::map<proto::ObjectRef, std::shared_ptr<PrefetchRecord>> prefetch_;
  std::vector<std::thread> pf_threads_;

  std::vector<shmem::SlotGrant> get_grants_;
  std::map<std::uint64_t, shmem::SlotGrant> put_grants_;  // by offset, until committed
  std::vector<std::shared_ptr<PendingWrite>> writes_;
  ResponseBuffer response_;
};

}  // namespace nexus::backend
