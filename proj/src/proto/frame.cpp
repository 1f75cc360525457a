// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/proto/frame.hpp"

#include <algorithm>
#include <cstring>
#include <fmt/format.h>

#include "nexus/net/socket.hpp"

namespace nexus::proto {
namespace {

class StreamSource final : public ByteSource {
 public:
  explicit StreamSource(net::Stream& s) : s_(s) {}
  std::size_t read_some(MutableByteSpan out) override { return s_.read_some(out); }

 private:
  net::Stream& s_;
};

void fill(ByteSource& source, MutableByteSpan out) {
  std::size_t got = 0;
  while (got < out.size()) {
    auto n = source.read_some(out.subspan(got));
    if (n == 0) {
      throw Error(Errc::kTruncatedFrame,
                  fmt::format("stream ended after {} of {} bytes", got, out.size()));
    }
    got += n;
  }
}

std::uint32_t check_length(std::uint32_t length) {
  if (length > kMaxFrameLength) {
    throw Error(Errc::kOversizeFrame, fmt::format("declared length {:#x} exceeds 16 MiB", length));
  }
  if (length == 0) throw Error(Errc::kTruncatedFrame, "frame without a type byte");
  return length;
}

}  // namespace

std::string_view message_type_name(MessageType type) noexcept {
  switch (type) {
    case MessageType::kIngressInvoke: return "INGRESS_INVOKE";
    case MessageType::kIngressResponse: return "INGRESS_RESPONSE";
    case MessageType::kIngressStatusReq: return "INGRESS_STATUS_REQ";
    case MessageType::kIngressStatus: return "INGRESS_STATUS";
    case MessageType::kInvoke: return "INVOKE";
    case MessageType::kGetReq: return "GET_REQ";
    case MessageType::kGetResp: return "GET_RESP";
    case MessageType::kPutReq: return "PUT_REQ";
    case MessageType::kPutAck: return "PUT_ACK";
    case MessageType::kFnResponse: return "FN_RESPONSE";
    case MessageType::kStreamOpen: return "STREAM_OPEN";
    case MessageType::kStreamClose: return "STREAM_CLOSE";
    case MessageType::kError: return "ERROR";
  }
  return "UNKNOWN";
}

Bytes encode_frame(MessageType type, ByteSpan body) {
  if (body.size() > kMaxFrameLength - 1) {
    throw Error(Errc::kOversizeFrame, fmt::format("body of {} bytes exceeds the control-frame cap", body.size()));
  }
  Bytes out;
  out.reserve(kFrameHeaderBytes + 1 + body.size());
  ByteWriter w(out);
  w.put(static_cast<std::uint32_t>(body.size() + 1));
  w.put(static_cast<std::uint8_t>(type));
  w.raw(body);
  return out;
}

std::size_t MemorySource::read_some(MutableByteSpan out) {
  auto n = std::min(out.size(), data_.size() - pos_);
  std::memcpy(out.data(), data_.data() + pos_, n);
  pos_ += n;
  return n;
}

Frame decode_frame(ByteSource& source) {
  std::byte header[kFrameHeaderBytes + 1];
  fill(source, header);
  std::uint32_t length;
  std::memcpy(&length, header, 4);
  check_length(length);
  Frame f;
  f.type = static_cast<MessageType>(header[4]);
  f.body.resize(length - 1);
  fill(source, f.body);
  return f;
}

std::optional<Frame> read_frame(net::Stream& stream) {
  std::byte first[1];
  if (stream.read_some(first) == 0) return std::nullopt;
  std::byte rest[kFrameHeaderBytes];
  StreamSource src(stream);
  fill(src, rest);
  std::uint32_t length;
  std::byte len_bytes[4] = {first[0], rest[0], rest[1], rest[2]};
  std::memcpy(&length, len_bytes, 4);
  check_length(length);
  Frame f;
  f.type = static_cast<MessageType>(rest[3]);
  f.body.resize(length - 1);
  fill(src, f.body);
  return f;
}

void write_frame(net::Stream& stream, MessageType type, ByteSpan body) {
  stream.write_all(encode_frame(type, body));
}

}  // namespace nexus::proto
