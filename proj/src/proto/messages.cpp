// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/proto/messages.hpp"

#include <algorithm>

namespace nexus::proto {
namespace {

void put_id(ByteWriter& w, const Id128& id) {
  w.raw({reinterpret_cast<const std::byte*>(id.bytes.data()), id.bytes.size()});
}

Id128 get_id(ByteReader& r) {
  Id128 id;
  auto b = r.take(16);
  std::transform(b.begin(), b.end(), id.bytes.begin(),
                 [](std::byte x) { return static_cast<std::uint8_t>(x); });
  return id;
}

void put_ref(ByteWriter& w, const ObjectRef& ref) {
  w.str16(ref.bucket);
  w.str16(ref.key);
}

ObjectRef get_ref(ByteReader& r) {
  ObjectRef ref;
  ref.bucket = r.str16();
  ref.key = r.str16();
  return ref;
}

template <typename E>
E get_enum(ByteReader& r, std::uint8_t max) {
  auto v = r.get<std::uint8_t>();
  if (v > max) throw Error(Errc::kSchemaError, "enumeration value out of range");
  return static_cast<E>(v);
}

void finish(const ByteReader& r) {
  if (!r.done()) throw Error(Errc::kSchemaError, "trailing bytes after message body");
}

}  // namespace

Bytes InvokeMsg::encode() const {
  Bytes out;
  ByteWriter w(out);
  put_id(w, invocation_id);
  put_id(w, idempotency_key);
  w.str16(function);
  w.blob32(event_body);
  return out;
}

InvokeMsg InvokeMsg::decode(ByteSpan body) {
  ByteReader r(body);
  InvokeMsg m;
  m.invocation_id = get_id(r);
  m.idempotency_key = get_id(r);
  m.function = r.str16();
  m.event_body = r.blob32();
  finish(r);
  return m;
}

Bytes GetReq::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.put(request_id);
  put_ref(w, ref);
  return out;
}

GetReq GetReq::decode(ByteSpan body) {
  ByteReader r(body);
  GetReq m;
  m.request_id = r.get<std::uint64_t>();
  m.ref = get_ref(r);
  finish(r);
  return m;
}

Bytes GetResp::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.put(request_id)
      .put(static_cast<std::uint8_t>(status))
      .put(static_cast<std::uint8_t>(mode))
      .put(offset)
      .put(length);
  return out;
}

GetResp GetResp::decode(ByteSpan body) {
  ByteReader r(body);
  GetResp m;
  m.request_id = r.get<std::uint64_t>();
  m.status = get_enum<Status>(r, 2);
  m.mode = get_enum<TransferMode>(r, 1);
  m.offset = r.get<std::uint64_t>();
  m.length = r.get<std::uint64_t>();
  finish(r);
  return m;
}

Bytes PutReq::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.put(request_id).put(static_cast<std::uint8_t>(phase)).put(flags);
  put_ref(w, ref);
  w.put(offset).put(length);
  return out;
}

PutReq PutReq::decode(ByteSpan body) {
  ByteReader r(body);
  PutReq m;
  m.request_id = r.get<std::uint64_t>();
  m.phase = get_enum<PutPhase>(r, 1);
  m.flags = r.get<std::uint8_t>();
  m.ref = get_ref(r);
  m.offset = r.get<std::uint64_t>();
  m.length = r.get<std::uint64_t>();
  finish(r);
  return m;
}

Bytes PutAck::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.put(request_id).put(static_cast<std::uint8_t>(status)).put(offset).put(length).put(version);
  w.str16(error);
  return out;
}

PutAck PutAck::decode(ByteSpan body) {
  ByteReader r(body);
  PutAck m;
  m.request_id = r.get<std::uint64_t>();
  m.status = get_enum<PutStatus>(r, 4);
  m.offset = r.get<std::uint64_t>();
  m.length = r.get<std::uint64_t>();
  m.version = r.get<std::uint64_t>();
  m.error = r.str16();
  finish(r);
  return m;
}

Bytes FnResponse::encode() const {
  Bytes out;
  ByteWriter w(out);
  put_id(w, invocation_id);
  w.put(static_cast<std::uint8_t>(status));
  w.blob32(payload);
  w.str16(error);
  return out;
}

FnResponse FnResponse::decode(ByteSpan body) {
  ByteReader r(body);
  FnResponse m;
  m.invocation_id = get_id(r);
  m.status = get_enum<Status>(r, 2);
  m.payload = r.blob32();
  m.error = r.str16();
  finish(r);
  return m;
}

Bytes StreamOpen::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.put(request_id);
  put_ref(w, ref);
  w.put(length).put(flags);
  return out;
}

StreamOpen StreamOpen::decode(ByteSpan body) {
  ByteReader r(body);
  StreamOpen m;
  m.request_id = r.get<std::uint64_t>();
  m.ref = get_ref(r);
  m.length = r.get<std::uint64_t>();
  m.flags = r.get<std::uint8_t>();
  finish(r);
  return m;
}

Bytes StreamClose::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.put(request_id).put(static_cast<std::uint8_t>(status)).put(total_bytes).put(version);
  w.str16(error);
  return out;
}

StreamClose StreamClose::decode(ByteSpan body) {
  ByteReader r(body);
  StreamClose m;
  m.request_id = r.get<std::uint64_t>();
  m.status = get_enum<Status>(r, 2);
  m.total_bytes = r.get<std::uint64_t>();
  m.version = r.get<std::uint64_t>();
  m.error = r.str16();
  finish(r);
  return m;
}

Bytes ErrorMsg::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.put(offending_type);
  w.str16(message);
  return out;
}

ErrorMsg ErrorMsg::decode(ByteSpan body) {
  ByteReader r(body);
  ErrorMsg m;
  m.offending_type = r.get<std::uint8_t>();
  m.message = r.str16();
  finish(r);
  return m;
}

}  // namespace nexus::proto
