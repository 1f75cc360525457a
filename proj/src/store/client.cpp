// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/store/client.hpp"

#include <cstring>
#include <fmt/format.h>

namespace nexus::store {

namespace {
constexpr std::size_t kMaxIdleConnections = 64;
}

StoreConnection::StoreConnection(const net::Endpoint& ep) : stream_(net::connect(ep)) {}

void StoreConnection::send_header(StoreOp op, const ObjectRef& ref, std::uint64_t payload) {
  if (!reusable()) throw Error(Errc::kTransportError, "store connection is mid-request");
  std::uint64_t length = 1 + 2 + ref.bucket.size() + 2 + ref.key.size() + payload;
  if (length > 0xFFFFFFFFull) throw Error(Errc::kStoreError, "object too large for the store protocol");
  Bytes out;
  ByteWriter w(out);
  w.put(static_cast<std::uint32_t>(length)).put(static_cast<std::uint8_t>(op));
  w.str16(ref.bucket).str16(ref.key);
  try {
    stream_.write_all(out);
  } catch (...) {
    broken_ = true;
    throw;
  }
}

std::pair<StoreStatus, std::uint64_t> StoreConnection::read_status() {
  std::byte hdr[5];
  bool ok = false;
  try {
    ok = stream_.read_exact(hdr);
  } catch (...) {
    broken_ = true;
    throw;
  }
  if (!ok) {
    broken_ = true;
    throw Error(Errc::kTransportError, "store closed the connection");
  }
  std::uint32_t length;
  std::memcpy(&length, hdr, 4);
  if (length == 0) {
    broken_ = true;
    throw Error(Errc::kTransportError, "malformed store response");
  }
  return {static_cast<StoreStatus>(hdr[4]), length - 1};
}

void StoreConnection::raise(StoreStatus status, std::uint64_t body_len, const ObjectRef& ref) {
  std::string msg(body_len, '\0');
  try {
    stream_.read_exact({reinterpret_cast<std::byte*>(msg.data()), msg.size()});
  } catch (...) {
    broken_ = true;
    throw;
  }
  switch (status) {
    case StoreStatus::kNotFound:
      throw Error(Errc::kNotFound, ref.to_string());
    case StoreStatus::kInjectedFailure:
      throw Error(Errc::kInjectedFailure, fmt::format("{}: {}", ref.to_string(), msg));
    default:
      throw Error(Errc::kStoreError, fmt::format("{}: {}", ref.to_string(), msg));
  }
}

std::uint64_t StoreConnection::begin_get(const ObjectRef& ref) {
  send_get(ref);
  return await_get(ref);
}

void StoreConnection::send_get(const ObjectRef& ref) { send_header(StoreOp::kGet, ref, 0); }

std::uint64_t StoreConnection::await_get(const ObjectRef& ref) {
  auto [status, len] = read_status();
  if (status != StoreStatus::kOk) raise(status, len, ref);
  pending_ = len;
  return len;
}

void StoreConnection::read_body(MutableByteSpan out) {
  if (out.size() > pending_) throw Error(Errc::kStoreError, "read past the end of the object");
  try {
    if (!out.empty() && !stream_.read_exact(out)) {
      throw Error(Errc::kTransportError, "store closed mid-object");
    }
  } catch (...) {
    broken_ = true;
    throw;
  }
  pending_ -= out.size();
}

void StoreConnection::begin_put(const ObjectRef& ref, std::uint64_t length) {
  send_header(StoreOp::kPut, ref, length);
  pending_ = length;
}

void StoreConnection::write_body(ByteSpan data) {
  if (data.size() > pending_) throw Error(Errc::kStoreError, "write past the declared length");
  try {
    stream_.write_all(data);
  } catch (...) {
    broken_ = true;
    throw;
  }
  pending_ -= data.size();
}

std::uint64_t StoreConnection::finish_put() {
  if (pending_ != 0) throw Error(Errc::kStoreError, "PUT body incomplete");
  auto [status, len] = read_status();
  if (status != StoreStatus::kOk) raise(status, len, {});
  if (len != 8) {
    broken_ = true;
    throw Error(Errc::kStoreError, "malformed PUT acknowledgment");
  }
  std::uint64_t version;
  pending_ = 8;
  read_body({reinterpret_cast<std::byte*>(&version), 8});
  return version;
}

std::optional<ObjectInfo> StoreConnection::head(const ObjectRef& ref) {
  send_header(StoreOp::kHead, ref, 0);
  auto [status, len] = read_status();
  if (status == StoreStatus::kNotFound) {
    pending_ = len;
    Bytes skip(len);
    read_body(skip);
    return std::nullopt;
  }
  if (status != StoreStatus::kOk) raise(status, len, ref);
  if (len != 16) {
    broken_ = true;
    throw Error(Errc::kStoreError, "malformed HEAD response");
  }
  ObjectInfo info;
  pending_ = 16;
  read_body({reinterpret_cast<std::byte*>(&info.version), 8});
  read_body({reinterpret_cast<std::byte*>(&info.size), 8});
  return info;
}

StoreClient::StoreClient(net::Endpoint ep) : ep_(std::move(ep)) {}

StoreClient::Lease::~Lease() {
  if (owner_ != nullptr && conn_ && conn_->reusable()) owner_->give_back(std::move(conn_));
}

StoreClient::Lease StoreClient::acquire() {
  {
    std::lock_guard lock(mu_);
    if (!idle_.empty()) {
      auto conn = std::move(idle_.back());
      idle_.pop_back();
      return Lease(*this, std::move(conn));
    }
  }
  return Lease(*this, std::make_unique<StoreConnection>(ep_));
}

void StoreClient::give_back(std::unique_ptr<StoreConnection> conn) {
  std::lock_guard lock(mu_);
  if (idle_.size() < kMaxIdleConnections) idle_.push_back(std::move(conn));
}

Bytes StoreClient::get(const ObjectRef& ref) {
  auto conn = acquire();
  Bytes out(conn->begin_get(ref));
  conn->read_body(out);
  return out;
}

std::uint64_t StoreClient::put(const ObjectRef& ref, ByteSpan data) {
  auto conn = acquire();
  conn->begin_put(ref, data.size());
  conn->write_body(data);
  return conn->finish_put();
}

std::optional<ObjectInfo> StoreClient::head(const ObjectRef& ref) {
  auto conn = acquire();
  return conn->head(ref);
}

}  // namespace nexus::store
