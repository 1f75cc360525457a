// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "nexus/proto/frame.hpp"

namespace nexus::proto {
namespace {

Bytes hex_bytes(std::initializer_list<int> v) {
  Bytes out;
  for (int b : v) out.push_back(static_cast<std::byte>(b));
  return out;
}

TEST(Frame, MinimalErrorFrame) {
  EXPECT_EQ(encode_frame(MessageType::kError, {}), hex_bytes({0x01, 0x00, 0x00, 0x00, 0x7F}));
}

TEST(Frame, LengthCountsTypeByte) {
  Bytes body(10, std::byte{0xAB});
  auto f = encode_frame(MessageType::kGetReq, body);
  ASSERT_EQ(f.size(), 15u);
  EXPECT_EQ(Bytes(f.begin(), f.begin() + 4), hex_bytes({0x0B, 0x00, 0x00, 0x00}));
  EXPECT_EQ(f[4], std::byte{0x11});
}

TEST(Frame, DecodeMinimal) {
  auto raw = hex_bytes({0x01, 0x00, 0x00, 0x00, 0x7F});
  MemorySource src(raw);
  auto f = decode_frame(src);
  EXPECT_EQ(f.type, MessageType::kError);
  EXPECT_TRUE(f.body.empty());
  EXPECT_EQ(src.consumed(), 5u);
}

TEST(Frame, TruncatedHeader) {
  auto raw = hex_bytes({0x01, 0x00, 0x00});
  MemorySource src(raw);
  try {
    decode_frame(src);
    FAIL() << "expected TruncatedFrame";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTruncatedFrame);
  }
}

TEST(Frame, TruncatedBody) {
  auto raw = hex_bytes({0x05, 0x00, 0x00, 0x00, 0x11, 0x01});
  MemorySource src(raw);
  EXPECT_THROW(decode_frame(src), Error);
}

TEST(Frame, DeclaredLengthAboveCap) {
  auto raw = hex_bytes({0x01, 0x00, 0x00, 0x01, 0x11});
  MemorySource src(raw);
  try {
    decode_frame(src);
    FAIL() << "expected OversizeFrame";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kOversizeFrame);
  }
}

TEST(Frame, DeclaredLengthAtCapIsAccepted) {
  Bytes raw = hex_bytes({0x00, 0x00, 0x00, 0x01, 0x11});
  raw.resize(raw.size() + kMaxFrameLength - 1);
  MemorySource src(raw);
  auto f = decode_frame(src);
  EXPECT_EQ(f.body.size(), kMaxFrameLength - 1);
}

TEST(Frame, EncodeRejectsOversizeBody) {
  Bytes body(kMaxFrameLength);
  try {
    encode_frame(MessageType::kPutReq, body);
    FAIL() << "expected OversizeFrame";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kOversizeFrame);
  }
}

TEST(Frame, ScopesPartitionTheTypeSpace) {
  for (int v = 0; v < 256; ++v) {
    auto t = static_cast<MessageType>(v);
    EXPECT_FALSE(is_ingress_scope(t) && is_sandbox_scope(t));
  }
  EXPECT_TRUE(is_ingress_scope(MessageType::kIngressInvoke));
  EXPECT_TRUE(is_ingress_scope(MessageType::kIngressResponse));
  EXPECT_TRUE(is_sandbox_scope(MessageType::kInvoke));
  EXPECT_TRUE(is_sandbox_scope(MessageType::kError));
}

TEST(Frame, RandomRoundTripsBackToBack) {
  std::mt19937_64 rng(0xF00D);
  std::uniform_int_distribution<int> byte(0, 255);
  std::geometric_distribution<std::size_t> len(0.01);
  std::vector<Frame> frames;
  Bytes stream;
  for (int i = 0; i < 1000; ++i) {
    Frame f{static_cast<MessageType>(byte(rng)), Bytes(len(rng))};
    for (auto& b : f.body) b = static_cast<std::byte>(byte(rng));
    auto enc = encode_frame(f.type, f.body);
    stream.insert(stream.end(), enc.begin(), enc.end());
    frames.push_back(std::move(f));
  }
  MemorySource src(stream);
  for (const auto& expected : frames) EXPECT_EQ(decode_frame(src), expected);
  EXPECT_EQ(src.consumed(), stream.size());
}

}  // namespace
}  // namespace nexus::proto
