// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Sandbox-scope message bodies. Field order and widths are fixed; see
// PROTOCOL.md for the byte layout.

#include <cstdint>
#include <string>

#include "nexus/common/bytes.hpp"
#include "nexus/common/ids.hpp"
#include "nexus/proto/envelope.hpp"
#include "nexus/proto/frame.hpp"

namespace nexus::proto {

enum class Status : std::uint8_t { kOk = 0, kNotFound = 1, kError = 2 };
enum class TransferMode : std::uint8_t { kSlot = 0, kRing = 1 };
enum class PutPhase : std::uint8_t { kAlloc = 0, kCommit = 1 };
enum class PutStatus : std::uint8_t {
  kStored = 0,     // synchronous write acknowledged by the store; version set
  kDelegated = 1,  // asynchronous write queued at the backend
  kGranted = 2,    // ALLOC answered with a slot (offset, length)
  kUseRing = 3,    // ALLOC refused: no slot space, stream through the ring
  kError = 4,
};

inline constexpr std::uint8_t kPutFlagAsync = 0x01;

struct InvokeMsg {
  Id128 invocation_id;
  Id128 idempotency_key;
  std::string function;
  Bytes event_body;

  Bytes encode() const;
  static InvokeMsg decode(ByteSpan body);
  friend bool operator==(const InvokeMsg&, const InvokeMsg&) = default;
};

struct GetReq {
  std::uint64_t request_id = 0;
  ObjectRef ref;

  Bytes encode() const;
  static GetReq decode(ByteSpan body);
  friend bool operator==(const GetReq&, const GetReq&) = default;
};

/// In SLOT mode (offset, length) is the payload window. In RING mode
/// offset is the ring area offset and length the total object size.
struct GetResp {
  std::uint64_t request_id = 0;
  Status status = Status::kOk;
  TransferMode mode = TransferMode::kSlot;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  Bytes encode() const;
  static GetResp decode(ByteSpan body);
  friend bool operator==(const GetResp&, const GetResp&) = default;
};

struct PutReq {
  std::uint64_t request_id = 0;
  PutPhase phase = PutPhase::kAlloc;
  std::uint8_t flags = 0;
  ObjectRef ref;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  bool async() const noexcept { return (flags & kPutFlagAsync) != 0; }
  Bytes encode() const;
  static PutReq decode(ByteSpan body);
  friend bool operator==(const PutReq&, const PutReq&) = default;
};

struct PutAck {
  std::uint64_t request_id = 0;
  PutStatus status = PutStatus::kStored;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t version = 0;
  std::string error;

  Bytes encode() const;
  static PutAck decode(ByteSpan body);
  friend bool operator==(const PutAck&, const PutAck&) = default;
};

struct FnResponse {
  Id128 invocation_id;
  Status status = Status::kOk;
  Bytes payload;
  std::string error;

  Bytes encode() const;
  static FnResponse decode(ByteSpan body);
  friend bool operator==(const FnResponse&, const FnResponse&) = default;
};

/// Opens a sandbox-to-backend ring transfer (PUT that does not fit a slot).
struct StreamOpen {
  std::uint64_t request_id = 0;
  ObjectRef ref;
  std::uint64_t length = 0;
  std::uint8_t flags = 0;

  Bytes encode() const;
  static StreamOpen decode(ByteSpan body);
  friend bool operator==(const StreamOpen&, const StreamOpen&) = default;
};

/// Ends a ring transfer in either direction.
struct StreamClose {
  std::uint64_t request_id = 0;
  Status status = Status::kOk;
  std::uint64_t total_bytes = 0;
  std::uint64_t version = 0;
  std::string error;

  Bytes encode() const;
  static StreamClose decode(ByteSpan body);
  friend bool operator==(const StreamClose&, const StreamClose&) = default;
};

struct ErrorMsg {
  std::uint8_t offending_type = 0;
  std::string message;

  Bytes encode() const;
  static ErrorMsg decode(ByteSpan body);
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

}  // namespace nexus::proto
