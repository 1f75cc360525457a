// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/store/server.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstring>

#include "nexus/common/clock.hpp"

namespace nexus::store {
namespace {

void respond(net::Stream& conn, StoreStatus status, ByteSpan payload) {
  Bytes out;
  out.reserve(5 + payload.size());
  ByteWriter w(out);
  w.put(static_cast<std::uint32_t>(payload.size() + 1));
  w.put(static_cast<std::uint8_t>(status));
  // Header and payload go out in one buffer for small responses; large
  // objects are sent straight from the immutable snapshot.
  if (payload.size() <= 64 * 1024) {
    w.raw(payload);
    conn.write_all(out);
  } else {
    conn.write_all(out);
    conn.write_all(payload);
  }
}

}  // namespace

std::uint64_t StoreProfile::service_time_us(std::uint64_t size_bytes) const noexcept {
  const auto bits = static_cast<long double>(size_bytes) * 8.0L;
  return one_way_latency_us + static_cast<std::uint64_t>(bits * 1e6L / static_cast<long double>(bandwidth_bps));
}

StoreServer::StoreServer(StoreProfile profile)
    : latency_us_(profile.one_way_latency_us),
      bandwidth_bps_(profile.bandwidth_bps),
      fail_next_puts_(profile.fail_next_puts) {
  set_bandwidth_bps(profile.bandwidth_bps);
}

StoreServer::~StoreServer() { stop(); }

void StoreServer::set_bandwidth_bps(std::uint64_t bps) {
  if (bps == 0) throw Error(Errc::kSchemaError, "bandwidth_bps must be > 0");
  bandwidth_bps_ = bps;
}

StoreProfile StoreServer::profile() const noexcept {
  return {latency_us_.load(), bandwidth_bps_.load(), fail_next_puts_.load()};
}

void StoreServer::start(const net::Endpoint& listen) {
  net::ignore_sigpipe();
  listener_ = net::Listener::bind(listen);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void StoreServer::stop() {
  if (!running_.exchange(false)) return;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  std::list<std::unique_ptr<Conn>> conns;
  {
    std::lock_guard lock(conns_mu_);
    conns.swap(conns_);
  }
  for (auto& c : conns) c->stream.shutdown();
  for (auto& c : conns) {
    if (c->thread.joinable()) c->thread.join();
  }
}

void StoreServer::accept_loop() {
  while (running_) {
    auto s = listener_.accept();
    if (!s) {
      if (!running_) break;
      continue;
    }
    std::lock_guard lock(conns_mu_);
    // Reap finished connections.
    for (auto it = conns_.begin(); it != conns_.end();) {
      if ((*it)->done) {
        (*it)->thread.join();
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
    auto conn = std::make_unique<Conn>();
    conn->stream = std::move(*s);
    auto* raw = conn.get();
    conn->thread = std::thread([this, raw] {
      try {
        serve(raw->stream);
      } catch (const std::exception& e) {
        spdlog::debug("store connection ended: {}", e.what());
      }
      raw->done = true;
    });
    conns_.push_back(std::move(conn));
  }
}

void StoreServer::serve(net::Stream& conn) {
  for (;;) {
    std::byte len_raw[4];
    if (!conn.read_exact(len_raw)) return;
    std::uint32_t length;
    std::memcpy(&length, len_raw, 4);
    if (length < 5) {
      respond(conn, StoreStatus::kBadRequest, as_bytes("request too short"));
      return;
    }
    std::byte fixed[3];
    conn.read_exact(fixed);
    auto op = static_cast<StoreOp>(fixed[0]);
    std::uint16_t bucket_len;
    std::memcpy(&bucket_len, fixed + 1, 2);
    std::string bucket(bucket_len, '\0');
    conn.read_exact({reinterpret_cast<std::byte*>(bucket.data()), bucket.size()});
    std::byte key_len_raw[2];
    conn.read_exact(key_len_raw);
    std::uint16_t key_len;
    std::memcpy(&key_len, key_len_raw, 2);
    std::string key(key_len, '\0');
    conn.read_exact({reinterpret_cast<std::byte*>(key.data()), key.size()});
    std::uint64_t header = 1 + 2 + bucket_len + 2 + key_len;
    if (header > length) {
      respond(conn, StoreStatus::kBadRequest, as_bytes("length shorter than header"));
      return;
    }
    Bytes payload(length - header);
    conn.read_exact(payload);

    RequestRecord rec;
    rec.op = op;
    rec.ref = {std::move(bucket), std::move(key)};
    rec.received_us = now_us();
    const StoreProfile prof = profile();

    switch (op) {
      case StoreOp::kGet: {
        auto obj = store_.get(rec.ref);
        rec.size = obj ? obj->data.size() : 0;
        sleep_until_us(rec.received_us + prof.service_time_us(rec.size));
        rec.status = obj ? StoreStatus::kOk : StoreStatus::kNotFound;
        rec.version = obj ? obj->version : 0;
        rec.responded_us = now_us();
        record(rec);
        if (obj) {
          respond(conn, StoreStatus::kOk, obj->data);
        } else {
          respond(conn, StoreStatus::kNotFound, as_bytes("no such key: " + rec.ref.to_string()));
        }
        break;
      }
      case StoreOp::kPut: {
        rec.size = payload.size();
        sleep_until_us(rec.received_us + prof.service_time_us(rec.size));
        std::uint32_t pending = fail_next_puts_.load();
        bool fail = false;
        while (pending > 0) {
          if (fail_next_puts_.compare_exchange_weak(pending, pending - 1)) {
            fail = true;
            break;
          }
        }
        if (fail) {
          rec.status = StoreStatus::kInjectedFailure;
          rec.responded_us = now_us();
          record(rec);
          respond(conn, StoreStatus::kInjectedFailure, as_bytes("injected PUT failure"));
          break;
        }
        rec.version = store_.put(rec.ref, std::move(payload));
        rec.status = StoreStatus::kOk;
        rec.responded_us = now_us();
        record(rec);
        Bytes ver;
        ByteWriter(ver).put(rec.version);
        respond(conn, StoreStatus::kOk, ver);
        break;
      }
      case StoreOp::kHead: {
        auto obj = store_.get(rec.ref);
        sleep_until_us(rec.received_us + prof.one_way_latency_us);
        rec.status = obj ? StoreStatus::kOk : StoreStatus::kNotFound;
        rec.size = obj ? obj->data.size() : 0;
        rec.version = obj ? obj->version : 0;
        rec.responded_us = now_us();
        record(rec);
        Bytes body;
        ByteWriter(body).put(rec.version).put(static_cast<std::uint64_t>(rec.size));
        respond(conn, rec.status, obj ? ByteSpan(body) : as_bytes("no such key"));
        break;
      }
      default:
        respond(conn, StoreStatus::kBadRequest, as_bytes("unknown op"));
        break;
    }
  }
}

void StoreServer::record(RequestRecord rec) {
  std::lock_guard lock(log_mu_);
  log_.push_back(std::move(rec));
}

std::vector<RequestRecord> StoreServer::request_log() const {
  std::lock_guard lock(log_mu_);
  return log_;
}

std::size_t StoreServer::count(StoreOp op, const ObjectRef& ref) const {
  std::lock_guard lock(log_mu_);
  return static_cast<std::size_t>(std::count_if(
      log_.begin(), log_.end(), [&](const RequestRecord& r) { return r.op == op && r.ref == ref; }));
}

std::size_t StoreServer::count(StoreOp op) const {
  std::lock_guard lock(log_mu_);
  return static_cast<std::size_t>(
      std::count_if(log_.begin(), log_.end(), [&](const RequestRecord& r) { return r.op == op; }));
}

void StoreServer::clear_log() {
  std::lock_guard lock(log_mu_);
  log_.clear();
}

}  // namespace nexus::store
