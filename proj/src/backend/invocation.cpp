// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "invocation.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>

#include "nexus/common/backoff.hpp"
#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/shmem/ring.hpp"

namespace nexus::backend {

using proto::MessageType;
using sandbox::Mode;

namespace {

constexpr std::uint64_t kRateChunk = 1u << 20;
constexpr std::uint64_t kStreamChunk = 256u << 10;

template <typename F>
struct ScopeExit {
  F fn;
  ~ScopeExit() { fn(); }
};
template <typename F>
ScopeExit(F) -> ScopeExit<F>;

proto::Status status_of(const Error& e) {
  return e.code() == Errc::kNotFound ? proto::Status::kNotFound : proto::Status::kError;
}

}  // namespace

Invocation::Invocation(Backend& be, proto::InvocationEnvelope env, Done done)
    : be_(be),
      env_(std::move(env)),
      done_(std::move(done)),
      response_([this](proto::IngressResponse& r) { on_release(r); }) {
  ms_.received = now_us();
  if (env_.invocation_id.is_zero()) env_.invocation_id = Id128::random();
  if (env_.idempotency_key.is_zero()) env_.idempotency_key = Id128::random();
}

// ---------------------------------------------------------------- lifecycle

void Invocation::run() {
  be_.metrics_.invocations++;
  cfg_ = be_.config();
  mode_ = cfg_->mode;
  const auto* fn = cfg_->find(env_.function);
  if (fn == nullptr) return fail_early(Error(Errc::kUnknownFunction, env_.function).what());
  fn_ = *fn;
  try {
    token_ = be_.creds_.resolve(fn_.name);
  } catch (const Error& e) {
    return fail_early(e.what());
  }

  be_.metrics_.queued++;
  be_.admission_.acquire();
  be_.metrics_.queued--;
  admitted_ = true;
  ms_.admitted = now_us();
  be_.metrics_.raise_peak(be_.metrics_.peak_active, ++be_.metrics_.active);
  if (be_.stopping_) return abort("backend is shutting down");

  try {
    std::vector<std::string> guest_args;
    if (mode_ == Mode::kCoupled) {
      guest_args = {"--store", cfg_->store,
                    "--fabric-request-us", std::to_string(cfg_->fabric.per_request_us),
                    "--fabric-mib-us", std::to_string(cfg_->fabric.per_mib_us),
                    "--rate-bps", std::to_string(fn_.rate_limit_bps)};
    }
    auto acquired = be_.manager_->acquire(fn_.name, mode_, fn_.restore, guest_args);
    sb_ = acquired.sandbox;
    cold_ = acquired.cold;
    be_.track(sb_, true);
    (cold_ ? be_.metrics_.cold_starts : be_.metrics_.warm_starts)++;

    // Provisioning and prefetch proceed concurrently.
    if (mode_ == Mode::kOffloadedAsync && !env_.input_hints.empty()) start_prefetch();
    if (cold_) be_.manager_->wait_ready(*sb_);
    ms_.ready = now_us();
    if (auto err = prefetch_failure()) throw Error(Errc::kPrefetchFailed, *err);

    be_.manager_->begin(*sb_);
    proto::InvokeMsg msg{env_.invocation_id, env_.idempotency_key, env_.function, env_.event_body};
    send(MessageType::kInvoke, msg.encode());
    ms_.invoke_sent = now_us();
    serve_session();
  } catch (const std::exception& e) {
    return abort(e.what());
  }
  finish();
}

void Invocation::fail_early(const std::string& error) {
  proto::IngressResponse r;
  r.error = error;
  response_.fail_now(std::move(r));
}

void Invocation::abort(const std::string& error) {
  stop_prefetch();
  if (sb_) {
    be_.track(sb_, false);
    be_.manager_->discard(sb_);
  }
  release_admission();
  proto::IngressResponse r;
  r.error = error;
  response_.fail_now(std::move(r));
}

void Invocation::finish() {
  stop_prefetch();
  for (auto& g : get_grants_) sb_->slots->release(g);
  get_grants_.clear();
  for (auto& [off, g] : put_grants_) sb_->slots->release(g);
  put_grants_.clear();

  if (be_.faults_.armed_for(FaultPoint::kPostFnResponsePreAck)) {
    // Die once the delegated writes are on the wire but before their acks
    // are observed, the window in which only the store knows the outcome.
    const auto deadline = now_us() + 2'000'000;
    auto on_wire = [&] {
      return std::all_of(writes_.begin(), writes_.end(), [](auto& w) {
        return w->body_sent.load() || w->state.load() == WriteState::kAcked ||
               w->state.load() == WriteState::kFailed;
      });
    };
    while (!on_wire() && now_us() < deadline) sleep_until_us(now_us() + 500);
    be_.faults_.reached(FaultPoint::kPostFnResponsePreAck);
  }

  // Early release: the sandbox goes back to service while writes drain.
  be_.track(sb_, false);
  be_.manager_->release_early(sb_, true);
  release_admission();

  proto::IngressResponse r;
  r.ok = fn_resp_->status == proto::Status::kOk;
  r.error = fn_resp_->error;
  r.payload = std::move(fn_resp_->payload);
  response_.hold(std::move(r));
}

void Invocation::release_admission() {
  if (!std::exchange(admitted_, false)) return;
  be_.metrics_.active--;
  be_.admission_.release();
}

void Invocation::on_release(proto::IngressResponse& r) {
  ms_.released = now_us();
  ms_.last_write_ack = r.timestamps_us.last_write_ack;
  r.invocation_id = env_.invocation_id;
  r.idempotency_key = env_.idempotency_key;
  r.timestamps_us = ms_;
  r.sandbox_id = sb_ ? sb_->id : 0;
  r.cold = cold_;
  auto& b = r.breakdown_us;
  auto span = [](std::uint64_t from, std::uint64_t to) { return (from && to > from) ? to - from : 0; };
  b.queue = span(ms_.received, ms_.admitted);
  b.restore = cold_ ? span(ms_.admitted, ms_.ready) : 0;
  b.prefetch = span(ms_.admitted, prefetch_done_us_);
  b.exec = span(ms_.invoke_sent, ms_.fn_response);
  b.writeback = span(ms_.fn_response, ms_.released);
  b.total = span(ms_.received, ms_.released);
  (r.ok ? be_.metrics_.responses_ok : be_.metrics_.responses_error)++;
  if (done_) done_(r);
}

// ---------------------------------------------------------- control channel

void Invocation::send(MessageType type, const Bytes& body) {
  be_.capture_.record(sb_->id, true, type, body);
  try {
    proto::write_frame(sb_->control, type, body);
  } catch (const Error& e) {
    throw SandboxGone(fmt::format("sandbox {}: {}", sb_->id, e.what()));
  }
}

proto::Frame Invocation::recv() {
  std::optional<proto::Frame> f;
  try {
    f = proto::read_frame(sb_->control);
  } catch (const Error& e) {
    throw SandboxGone(fmt::format("sandbox {}: {}", sb_->id, e.what()));
  }
  if (!f) throw SandboxGone(fmt::format("sandbox {} closed its control channel", sb_->id));
  be_.capture_.record(sb_->id, false, f->type, f->body);
  return std::move(*f);
}

void Invocation::serve_session() {
  for (;;) {
    auto f = recv();
    try {
      switch (f.type) {
        case MessageType::kGetReq:
          handle_get(proto::GetReq::decode(f.body));
          break;
        case MessageType::kPutReq:
          handle_put(proto::PutReq::decode(f.body));
          break;
        case MessageType::kStreamOpen:
          handle_ring_put(proto::StreamOpen::decode(f.body));
          break;
        case MessageType::kFnResponse: {
          auto r = proto::FnResponse::decode(f.body);
          ms_.fn_response = now_us();
          fn_resp_ = std::move(r);
          return;
        }
        case MessageType::kError:
          spdlog::warn("sandbox {} reported: {}", sb_->id, proto::ErrorMsg::decode(f.body).message);
          break;
        default:
          send(MessageType::kError,
               proto::ErrorMsg{static_cast<std::uint8_t>(f.type),
                               fmt::format("unexpected message type 0x{:02x}", static_cast<int>(f.type))}
                   .encode());
      }
    } catch (const Error& e) {
      // A malformed body: report it and keep the channel.
      if (e.code() != Errc::kTruncatedFrame && e.code() != Errc::kSchemaError) throw;
      send(MessageType::kError, proto::ErrorMsg{static_cast<std::uint8_t>(f.type), e.what()}.encode());
    }
  }
}

// ----------------------------------------------------------------- prefetch

void Invocation::start_prefetch() {
  std::lock_guard lock(pf_mu_);
  for (auto& hint : env_.input_hints) {
    if (prefetch_.count(hint.ref)) continue;
    auto rec = std::make_shared<PrefetchRecord>();
    rec->hint = hint;
    rec->started_us = now_us();
    prefetch_[hint.ref] = rec;
    be_.metrics_.prefetches++;
    pf_threads_.emplace_back([self = shared_from_this(), rec] { self->prefetch_one(rec); });
  }
}

void Invocation::prefetch_one(const std::shared_ptr<PrefetchRecord>& rec) {
  const auto& ref = rec->hint.ref;
  std::optional<shmem::SlotGrant> grant;
  PrefetchRecord::State outcome = PrefetchRecord::State::kFilled;
  proto::Status failure = proto::Status::kError;
  std::string error;
  try {
    auto lease = be_.store_->acquire();
    {
      std::lock_guard lock(pf_mu_);
      if (rec->cancelled) throw Error(Errc::kPrefetchFailed, "cancelled");
      rec->conn = &*lease;
    }
    ScopeExit detach{[&] {
      std::lock_guard lock(pf_mu_);
      rec->conn = nullptr;
    }};
    // Hint-sized allocation up front; the true size arrives with the data.
    if (rec->hint.size_bytes) grant = try_grant(*rec->hint.size_bytes);
    if (rec->hint.size_bytes && !grant) {
      outcome = PrefetchRecord::State::kSkipped;
    } else {
      lease->send_get(ref);
      be_.metrics_.store_gets++;
      be_.faults_.reached(FaultPoint::kDuringPrefetch);
      const auto size = lease->await_get(ref);
      if (grant && grant->length != size) {
        be_.metrics_.hint_mismatches++;
        sb_->slots->release(*grant);
        grant.reset();
      }
      if (!grant) grant = try_grant(size);
      if (!grant) {
        // Too large for the slot area; the GET will stream instead. The
        // half-read connection is dropped with the lease.
        outcome = PrefetchRecord::State::kSkipped;
      } else {
        fill_slot(*lease, *grant, be_.limiter_.client_for(fn_.name, ref.bucket));
        if (cfg_->verify_checksums) shmem::seal_slot(*grant, sb_->region);
      }
    }
  } catch (const Error& e) {
    outcome = PrefetchRecord::State::kFailed;
    failure = status_of(e);
    error = fmt::format("prefetch {}: {}", ref.to_string(), e.what());
    if (grant) sb_->slots->release(*grant);
    grant.reset();
    be_.metrics_.prefetch_failures++;
  }
  std::lock_guard lock(pf_mu_);
  rec->state = outcome;
  if (grant) rec->grant = *grant;
  rec->failure = failure;
  rec->error = error;
  rec->done_us = now_us();
  prefetch_done_us_ = std::max(prefetch_done_us_, rec->done_us);
  pf_cv_.notify_all();
}

std::shared_ptr<PrefetchRecord> Invocation::find_prefetch(const proto::ObjectRef& ref) {
  std::lock_guard lock(pf_mu_);
  auto it = prefetch_.find(ref);
  return it == prefetch_.end() ? nullptr : it->second;
}

std::optional<std::string> Invocation::prefetch_failure() {
  std::lock_guard lock(pf_mu_);
  for (auto& [ref, rec] : prefetch_) {
    if (rec->state == PrefetchRecord::State::kFailed) return rec->error;
  }
  return std::nullopt;
}

void Invocation::stop_prefetch() {
  {
    std::lock_guard lock(pf_mu_);
    for (auto& [ref, rec] : prefetch_) {
      rec->cancelled = true;
      if (rec->conn != nullptr) rec->conn->shutdown();
    }
  }
  for (auto& t : pf_threads_) t.join();
  pf_threads_.clear();
  std::lock_guard lock(pf_mu_);
  for (auto& [ref, rec] : prefetch_) {
    if (rec->state == PrefetchRecord::State::kFilled && sb_) sb_->slots->release(rec->grant);
  }
  prefetch_.clear();
}

// --------------------------------------------------------------- data plane

std::optional<shmem::SlotGrant> Invocation::try_grant(std::uint64_t length) {
  try {
    return sb_->slots->grant(length);
  } catch (const Error& e) {
    if (e.code() == Errc::kRegionFull) return std::nullopt;
    throw;
  }
}

void Invocation::fill_slot(store::StoreConnection& conn, const shmem::SlotGrant& g, const std::string& client) {
  // The transfer layer writes the payload into the slot exactly once.
  auto window = sb_->region.window(g.offset, g.length);
  for (std::uint64_t off = 0; off < g.length; off += kRateChunk) {
    auto n = std::min(kRateChunk, g.length - off);
    be_.limiter_.acquire(fn_.name, client, n);
    conn.read_body(window.subspan(off, n));
    be_.metrics_.slot_bytes_written += n;
  }
}

std::uint64_t Invocation::write_slot(const proto::ObjectRef& ref, const shmem::SlotGrant& g,
                                     const std::function<void()>& body_sent) {
  const auto client = be_.limiter_.client_for(fn_.name, ref.bucket);
  auto lease = be_.store_->acquire();
  be_.metrics_.store_puts++;
  lease->begin_put(ref, g.length);
  auto window = sb_->region.window(g.offset, g.length);
  for (std::uint64_t off = 0; off < g.length; off += kRateChunk) {
    auto n = std::min(kRateChunk, g.length - off);
    be_.limiter_.acquire(fn_.name, client, n);
    lease->write_body(window.subspan(off, n));
  }
  if (body_sent) body_sent();
  return lease->finish_put();
}

void Invocation::push_ring(shmem::RingView& ring, ByteSpan data) {
  Backoff backoff;
  while (!data.empty()) {
    auto n = ring.write(data);
    if (n > 0) {
      be_.metrics_.raise_peak(be_.metrics_.peak_ring_fill, ring.fill());
      data = data.subspan(n);
      backoff.reset();
      continue;
    }
    // The guest sends nothing mid-stream, so a readable channel is EOF.
    if (sb_->control.readable()) throw SandboxGone(fmt::format("sandbox {} died mid-stream", sb_->id));
    backoff.pause();
  }
}

void Invocation::handle_get(const proto::GetReq& req) {
  if (auto rec = find_prefetch(req.ref)) {
    std::unique_lock lock(pf_mu_);
    pf_cv_.wait(lock, [&] { return rec->state != PrefetchRecord::State::kFetching; });
    if (rec->state == PrefetchRecord::State::kFilled) {
      auto g = rec->grant;
      lock.unlock();
      if (cfg_->verify_checksums && !shmem::verify_slot(g, sb_->region)) be_.metrics_.checksum_failures++;
      be_.metrics_.prefetch_hits++;
      send(MessageType::kGetResp,
           proto::GetResp{req.request_id, proto::Status::kOk, proto::TransferMode::kSlot, g.offset, g.length}.encode());
      return;
    }
    if (rec->state == PrefetchRecord::State::kFailed) {
      auto status = rec->failure;
      lock.unlock();
      send(MessageType::kGetResp, proto::GetResp{req.request_id, status, proto::TransferMode::kSlot, 0, 0}.encode());
      return;
    }
  }
  sync_get(req);
}

void Invocation::sync_get(const proto::GetReq& req) {
  const auto client = be_.limiter_.client_for(fn_.name, req.ref.bucket);
  std::optional<store::StoreClient::Lease> lease;
  std::uint64_t size = 0;
  try {
    lease.emplace(be_.store_->acquire());
    be_.metrics_.store_gets++;
    size = (*lease)->begin_get(req.ref);
  } catch (const Error& e) {
    send(MessageType::kGetResp,
         proto::GetResp{req.request_id, status_of(e), proto::TransferMode::kSlot, 0, 0}.encode());
    return;
  }

  // Opaque invocations stream; otherwise a slot when the object fits.
  std::optional<shmem::SlotGrant> g;
  if (!env_.opaque_inputs()) g = try_grant(size);
  if (g) {
    try {
      fill_slot(**lease, *g, client);
    } catch (const Error& e) {
      sb_->slots->release(*g);
      send(MessageType::kGetResp, proto::GetResp{req.request_id, proto::Status::kError, proto::TransferMode::kSlot, 0, 0}.encode());
      return;
    }
    if (cfg_->verify_checksums) shmem::seal_slot(*g, sb_->region);
    get_grants_.push_back(*g);
    be_.metrics_.sync_slot_gets++;
    send(MessageType::kGetResp,
         proto::GetResp{req.request_id, proto::Status::kOk, proto::TransferMode::kSlot, g->offset, g->length}.encode());
    return;
  }

  be_.metrics_.ring_gets++;
  send(MessageType::kGetResp, proto::GetResp{req.request_id, proto::Status::kOk, proto::TransferMode::kRing,
                                             sb_->region.header().ring_area_offset, size}
                                  .encode());
  shmem::RingView ring(sb_->region.ring_area());
  Bytes buf(std::min<std::uint64_t>(kStreamChunk, ring.capacity()));
  std::uint64_t moved = 0;
  proto::StreamClose close{req.request_id, proto::Status::kOk, 0, 0, {}};
  while (moved < size) {
    auto n = std::min<std::uint64_t>(buf.size(), size - moved);
    auto chunk = MutableByteSpan(buf).first(n);
    try {
      be_.limiter_.acquire(fn_.name, client, n);
      (*lease)->read_body(chunk);
    } catch (const Error& e) {
      close.status = proto::Status::kError;
      close.error = e.what();
      break;
    }
    push_ring(ring, chunk);
    moved += n;
  }
  be_.metrics_.ring_bytes += moved;
  close.total_bytes = moved;
  send(MessageType::kStreamClose, close.encode());
}

void Invocation::handle_put(const proto::PutReq& req) {
  if (req.phase == proto::PutPhase::kAlloc) {
    if (auto g = try_grant(req.length)) {
      put_grants_[g->offset] = *g;
      send(MessageType::kPutAck,
           proto::PutAck{req.request_id, proto::PutStatus::kGranted, g->offset, g->length, 0, {}}.encode());
    } else {
      send(MessageType::kPutAck, proto::PutAck{req.request_id, proto::PutStatus::kUseRing, 0, 0, 0, {}}.encode());
    }
    return;
  }

  auto it = put_grants_.find(req.offset);
  if (it == put_grants_.end() || it->second.length != req.length) {
    send(MessageType::kPutAck,
         proto::PutAck{req.request_id, proto::PutStatus::kError, 0, 0, 0, "commit does not match a grant"}.encode());
    return;
  }
  auto g = it->second;
  put_grants_.erase(it);

  if (req.async() && mode_ == Mode::kOffloadedAsync) {
    delegate(req.ref, g);
    send(MessageType::kPutAck,
         proto::PutAck{req.request_id, proto::PutStatus::kDelegated, g.offset, g.length, 0, {}}.encode());
    return;
  }
  proto::PutAck ack{req.request_id, proto::PutStatus::kStored, g.offset, g.length, 0, {}};
  try {
    be_.metrics_.sync_puts++;
    ack.version = write_slot(req.ref, g, {});
  } catch (const Error& e) {
    ack.status = proto::PutStatus::kError;
    ack.error = e.what();
  }
  sb_->slots->release(g);
  send(MessageType::kPutAck, ack.encode());
}

void Invocation::handle_ring_put(const proto::StreamOpen& open) {
  // Ring writes are always synchronous: the ring is reused as soon as the
  // call returns.
  be_.metrics_.ring_puts++;
  const auto client = be_.limiter_.client_for(fn_.name, open.ref.bucket);
  std::optional<store::StoreClient::Lease> lease;
  std::string error;
  try {
    lease.emplace(be_.store_->acquire());
    be_.metrics_.store_puts++;
    (*lease)->begin_put(open.ref, open.length);
  } catch (const Error& e) {
    error = e.what();
  }
  shmem::RingView ring(sb_->region.ring_area());
  Bytes buf(std::min<std::uint64_t>(kStreamChunk, ring.capacity()));
  std::uint64_t consumed = 0;
  Backoff backoff;
  // Consume every byte even after a store error so the ring ends empty.
  while (consumed < open.length) {
    auto n = ring.read(MutableByteSpan(buf).first(std::min<std::uint64_t>(buf.size(), open.length - consumed)));
    if (n == 0) {
      if (sb_->control.readable()) throw SandboxGone(fmt::format("sandbox {} died mid-stream", sb_->id));
      backoff.pause();
      continue;
    }
    backoff.reset();
    if (error.empty()) {
      try {
        be_.limiter_.acquire(fn_.name, client, n);
        (*lease)->write_body(ByteSpan(buf).first(n));
      } catch (const Error& e) {
        error = e.what();
      }
    }
    consumed += n;
  }
  be_.metrics_.ring_bytes += consumed;
  proto::PutAck ack{open.request_id, proto::PutStatus::kStored, 0, open.length, 0, {}};
  if (error.empty()) {
    try {
      ack.version = (*lease)->finish_put();
    } catch (const Error& e) {
      error = e.what();
    }
  }
  if (!error.empty()) {
    ack.status = proto::PutStatus::kError;
    ack.error = error;
  }
  send(MessageType::kPutAck, ack.encode());
}

void Invocation::delegate(const proto::ObjectRef& ref, const shmem::SlotGrant& g) {
  auto pw = std::make_shared<PendingWrite>();
  pw->invocation_id = env_.invocation_id;
  pw->idempotency_key = env_.idempotency_key;
  pw->ref = ref;
  pw->grant = g;
  response_.add_pending();
  writes_.push_back(pw);
  be_.metrics_.async_puts++;
  be_.tasks_.spawn([self = shared_from_this(), pw, sb = sb_] { self->drive_write(pw, sb); });
}

void Invocation::drive_write(const std::shared_ptr<PendingWrite>& pw, const sandbox::SandboxPtr& sb) {
  const auto retries = cfg_->writeback_retries;
  for (std::uint32_t attempt = 0; attempt <= retries; ++attempt) {
    pw->attempts++;
    pw->state = WriteState::kInFlight;
    try {
      pw->version = write_slot(pw->ref, pw->grant, [&] { pw->body_sent = true; });
      pw->acked_at_us = now_us();
      pw->state = WriteState::kAcked;
      break;
    } catch (const Error& e) {
      pw->error = e.what();
      pw->body_sent = false;
      if (attempt < retries) {
        be_.metrics_.write_retries++;
        sleep_until_us(now_us() + (cfg_->writeback_backoff_us << attempt));
      }
    }
  }
  sb->slots->release(pw->grant);
  if (pw->state == WriteState::kAcked) {
    response_.write_acked(pw->acked_at_us);
  } else {
    pw->state = WriteState::kFailed;
    be_.metrics_.write_failures++;
    response_.write_failed(pw->ref.to_string() + ": " + pw->error);
  }
}

}  // namespace nexus::backend
