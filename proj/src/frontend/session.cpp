// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/frontend/session.hpp"

#include <fmt/format.h>

#include <cstring>

#include "nexus/common/backoff.hpp"
#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"

namespace nexus::frontend {

using proto::MessageType;

/// Drains a RING-mode GET. All state lives in the session so an abandoned
/// body can still be finished before the next request.
class Session::RingBody final : public BodyStream {
 public:
  RingBody(Session& s, std::uint64_t total, std::uint64_t epoch) : s_(s), total_(total), epoch_(epoch) {}
  ~RingBody() override {
    if (s_.open_stream_ == this) s_.open_stream_ = nullptr;
  }
  std::uint64_t size() const override { return total_; }
  std::size_t read(MutableByteSpan out) override;

  std::uint64_t remaining() const noexcept { return total_ - consumed_; }
  void drain();

 private:
  friend class Session;
  Session& s_;
  std::uint64_t total_;
  std::uint64_t consumed_ = 0;
  std::uint64_t epoch_;
  bool closed_ = false;
};

std::size_t Session::RingBody::read(MutableByteSpan out) {
  if (*s_.epoch_ != epoch_) throw Error(Errc::kIllegalState, "body stream used after its invocation ended");
  if (remaining() == 0) {
    if (!closed_) s_.finish_stream();
    return 0;
  }
  auto want = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), remaining()));
  Backoff backoff;
  for (;;) {
    auto n = s_.ring_.read(out.first(want));
    if (n > 0) {
      consumed_ += n;
      s_.counters_.get_copied_bytes += n;
      if (remaining() == 0) s_.finish_stream();
      return static_cast<std::size_t>(n);
    }
    // Nothing buffered: the producer may have given up and closed early.
    if (s_.control_.readable()) {
      s_.finish_stream();
      throw Error(Errc::kTransportError, "stream closed before the body was complete");
    }
    backoff.pause();
  }
}

void Session::RingBody::drain() {
  std::byte sink[64 * 1024];
  while (remaining() > 0 && !closed_) read(sink);
  if (!closed_) s_.finish_stream();
}

Session::Session(net::Endpoint ep, AttachOptions opts, net::Stream control, shmem::MappedRegion region)
    : control_ep_(std::move(ep)), opts_(opts), control_(std::move(control)), region_(std::move(region)) {
  if (region_.mode() == shmem::RegionMode::kRing) ring_ = shmem::RingView(region_.ring_area());
}

Session::~Session() = default;

std::unique_ptr<Session> Session::attach(const net::Endpoint& control,
                                         const std::filesystem::path& region_path,
                                         const AttachOptions& opts) {
  auto region = shmem::MappedRegion::attach(region_path);
  const auto give_up = now_us() + opts.retry_budget_us;
  auto backoff = opts.first_backoff_us;
  for (;;) {
    try {
      return std::unique_ptr<Session>(new Session(control, opts, net::connect(control), std::move(region)));
    } catch (const Error& e) {
      if (now_us() + backoff > give_up) {
        throw Error(Errc::kAttachError, fmt::format("{}: {}", control.to_string(), e.what()));
      }
      sleep_until_us(now_us() + backoff);
      backoff = std::min(backoff * 2, opts.max_backoff_us);
    }
  }
}

void Session::send(MessageType type, const Bytes& body) { proto::write_frame(control_, type, body); }

proto::Frame Session::expect(MessageType type) {
  for (;;) {
    auto f = proto::read_frame(control_);
    if (!f) throw Error(Errc::kTransportError, "control channel closed");
    if (f->type == type) return std::move(*f);
    if (f->type == MessageType::kError) {
      auto e = proto::ErrorMsg::decode(f->body);
      throw Error(Errc::kTransportError, "backend rejected request: " + e.message);
    }
    send(MessageType::kError,
         proto::ErrorMsg{static_cast<std::uint8_t>(f->type),
                         fmt::format("unexpected {} while waiting for {}", proto::message_type_name(f->type),
                                     proto::message_type_name(type))}
             .encode());
  }
}

void Session::require_active(const char* op) const {
  if (!active_) throw Error(Errc::kIllegalState, fmt::format("{} outside an invocation", op));
}

std::optional<proto::InvokeMsg> Session::next_invocation() {
  if (active_) throw Error(Errc::kIllegalState, "previous invocation has not responded");
  for (;;) {
    std::optional<proto::Frame> f;
    try {
      f = proto::read_frame(control_);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (!f) return std::nullopt;
    if (f->type == MessageType::kInvoke) {
      auto msg = proto::InvokeMsg::decode(f->body);
      active_ = msg.invocation_id;
      return msg;
    }
    send(MessageType::kError, proto::ErrorMsg{static_cast<std::uint8_t>(f->type), "expected INVOKE"}.encode());
  }
}

void Session::finish_stream() {
  auto* body = open_stream_;
  if (body == nullptr || body->closed_) return;
  auto close = proto::StreamClose::decode(expect(MessageType::kStreamClose).body);
  body->closed_ = true;
  open_stream_ = nullptr;
  // Whatever the producer left behind belongs to this transfer.
  std::byte sink[64 * 1024];
  while (ring_.read(sink) > 0) {
  }
  if (close.status != proto::Status::kOk) {
    throw Error(Errc::kStoreError, close.error.empty() ? "stream failed" : close.error);
  }
  if (close.total_bytes != body->consumed_) {
    throw Error(Errc::kTransportError,
                fmt::format("stream delivered {} of {} bytes", body->consumed_, close.total_bytes));
  }
}

bool Session::reconnect() {
  const auto give_up = now_us() + opts_.retry_budget_us;
  auto backoff = opts_.first_backoff_us;
  while (now_us() + backoff <= give_up) {
    try {
      control_ = net::connect(control_ep_);
      return true;
    } catch (const Error&) {
      sleep_until_us(now_us() + backoff);
      backoff = std::min(backoff * 2, opts_.max_backoff_us);
    }
  }
  return false;
}

ObjectBody Session::get_object(const ObjectRef& ref) {
  require_active("get_object");
  if (open_stream_ != nullptr) open_stream_->drain();
  try {
    return get_once(ref);
  } catch (const Error& e) {
    // One transparent retry when the channel itself broke.
    if (e.code() != Errc::kTransportError || !control_.readable() || !reconnect()) throw;
    return get_once(ref);
  }
}

ObjectBody Session::get_once(const ObjectRef& ref) {
  const auto id = next_request_id_++;
  send(MessageType::kGetReq, proto::GetReq{id, ref}.encode());
  auto resp = proto::GetResp::decode(expect(MessageType::kGetResp).body);
  if (resp.request_id != id) throw Error(Errc::kTransportError, "GET_RESP for a different request");
  switch (resp.status) {
    case proto::Status::kOk:
      break;
    case proto::Status::kNotFound:
      throw Error(Errc::kNotFound, ref.to_string());
    default:
      throw Error(Errc::kStoreError, "GET " + ref.to_string() + " failed");
  }
  if (resp.mode == proto::TransferMode::kSlot) {
    auto window = region_.window(resp.offset, resp.length);
    counters_.slot_gets++;
    return ObjectBody(PayloadView(window.data(), window.size(), epoch_, *epoch_));
  }
  counters_.ring_gets++;
  counters_.get_copies++;
  auto body = std::make_unique<RingBody>(*this, resp.length, *epoch_);
  open_stream_ = body.get();
  return ObjectBody(std::move(body));
}

std::uint64_t Session::put_object(const ObjectRef& ref, ByteSpan data) {
  return put_object(ref, data, async_puts_);
}

std::uint64_t Session::put_object(const ObjectRef& ref, ByteSpan data, bool async) {
  require_active("put_object");
  if (open_stream_ != nullptr) open_stream_->drain();
  const auto id = next_request_id_++;
  const std::uint8_t flags = async ? proto::kPutFlagAsync : 0;
  proto::PutReq alloc{id, proto::PutPhase::kAlloc, flags, ref, 0, data.size()};
  send(MessageType::kPutReq, alloc.encode());
  auto ack = proto::PutAck::decode(expect(MessageType::kPutAck).body);
  counters_.puts++;
  if (ack.status == proto::PutStatus::kUseRing) return put_via_ring(id, ref, data, async);
  if (ack.status != proto::PutStatus::kGranted) throw Error(Errc::kStoreError, "PUT refused: " + ack.error);

  // The single producer-side copy: handler memory into the granted slot.
  auto window = region_.window(ack.offset, ack.length);
  if (window.size() != data.size()) throw Error(Errc::kTransportError, "slot grant has the wrong length");
  if (!data.empty()) std::memcpy(window.data(), data.data(), data.size());
  counters_.put_copies++;
  counters_.put_copied_bytes += data.size();

  proto::PutReq commit{id, proto::PutPhase::kCommit, flags, ref, ack.offset, ack.length};
  send(MessageType::kPutReq, commit.encode());
  auto done = proto::PutAck::decode(expect(MessageType::kPutAck).body);
  switch (done.status) {
    case proto::PutStatus::kStored:
      return done.version;
    case proto::PutStatus::kDelegated:
      return 0;
    default:
      throw Error(done.error.find("injected") != std::string::npos ? Errc::kInjectedFailure : Errc::kStoreError,
                  "PUT " + ref.to_string() + ": " + done.error);
  }
}

std::uint64_t Session::put_via_ring(std::uint64_t id, const ObjectRef& ref, ByteSpan data, bool async) {
  send(MessageType::kStreamOpen, proto::StreamOpen{id, ref, data.size(), async ? proto::kPutFlagAsync : std::uint8_t{0}}.encode());
  std::uint64_t sent = 0;
  Backoff backoff;
  while (sent < data.size()) {
    auto n = ring_.write(data.subspan(sent));
    if (n > 0) {
      sent += n;
      backoff.reset();
      continue;
    }
    if (control_.readable()) break;  // early verdict, most likely an error
    backoff.pause();
  }
  counters_.put_copies++;
  counters_.put_copied_bytes += sent;
  auto ack = proto::PutAck::decode(expect(MessageType::kPutAck).body);
  if (ack.status == proto::PutStatus::kStored) return ack.version;
  if (ack.status == proto::PutStatus::kDelegated) return 0;
  throw Error(ack.error.find("injected") != std::string::npos ? Errc::kInjectedFailure : Errc::kStoreError,
              "PUT " + ref.to_string() + ": " + ack.error);
}

void Session::respond(proto::Status status, ByteSpan payload, std::string error) {
  require_active("respond");
  if (payload.size() > proto::kMaxEventBodyBytes) {
    throw Error(Errc::kSchemaError, "response payload exceeds 64 KiB");
  }
  if (open_stream_ != nullptr) {
    try {
      open_stream_->drain();
    } catch (const Error&) {
      // The stream's failure does not change what the handler reports.
    }
  }
  proto::FnResponse r{*active_, status, Bytes(payload.begin(), payload.end()), std::move(error)};
  ++*epoch_;
  active_.reset();
  send(MessageType::kFnResponse, r.encode());
}

}  // namespace nexus::frontend
