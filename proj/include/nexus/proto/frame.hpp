// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "nexus/common/bytes.hpp"

namespace nexus::net {
class Stream;
}

namespace nexus::proto {

/// One byte on the wire. Values 0x01-0x0F are ingress scope, 0x10-0x7F are
/// sandbox scope. Receivers must tolerate values outside the list.
enum class MessageType : std::uint8_t {
  kIngressInvoke = 0x01,
  kIngressResponse = 0x02,
  kIngressStatusReq = 0x03,
  kIngressStatus = 0x04,
  kInvoke = 0x10,
  kGetReq = 0x11,
  kGetResp = 0x12,
  kPutReq = 0x13,
  kPutAck = 0x14,
  kFnResponse = 0x15,
  kStreamOpen = 0x16,
  kStreamClose = 0x17,
  kError = 0x7F,
};

std::string_view message_type_name(MessageType type) noexcept;

/// Largest permitted value of the length field (type byte + body).
inline constexpr std::uint32_t kMaxFrameLength = 16u << 20;
inline constexpr std::size_t kFrameHeaderBytes = 4;

inline bool is_ingress_scope(MessageType t) noexcept {
  auto v = static_cast<std::uint8_t>(t);
  return v >= 0x01 && v <= 0x0F;
}
inline bool is_sandbox_scope(MessageType t) noexcept {
  auto v = static_cast<std::uint8_t>(t);
  return v >= 0x10 && v <= 0x7F;
}

struct Frame {
  MessageType type{};
  Bytes body;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// [u32 LE length][u8 type][body], length = 1 + body size.
Bytes encode_frame(MessageType type, ByteSpan body);

/// Pull-based byte source for the decoder. read_some returns 0 at end.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  virtual std::size_t read_some(MutableByteSpan out) = 0;
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(ByteSpan data) : data_(data) {}
  std::size_t read_some(MutableByteSpan out) override;
  std::size_t consumed() const noexcept { return pos_; }

 private:
  ByteSpan data_;
  std::size_t pos_ = 0;
};

/// Consumes exactly one frame. Throws TruncatedFrame on a short stream
/// (including an empty one) and OversizeFrame when the declared length
/// exceeds the cap.
Frame decode_frame(ByteSource& source);

/// Socket helpers. read_frame returns nullopt on a clean end of stream at a
/// frame boundary.
std::optional<Frame> read_frame(net::Stream& stream);
void write_frame(net::Stream& stream, MessageType type, ByteSpan body);

}  // namespace nexus::proto
