// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "nexus/common/bytes.hpp"
#include "nexus/proto/envelope.hpp"

namespace nexus::frontend {

using proto::ObjectRef;

/// Payload bytes copied by the client library on behalf of the handler.
struct CopyCounters {
  std::uint64_t get_copies = 0;  // payload copies made while serving GETs
  std::uint64_t get_copied_bytes = 0;
  std::uint64_t put_copies = 0;  // payload copies made while serving PUTs
  std::uint64_t put_copied_bytes = 0;
  std::uint64_t slot_gets = 0;
  std::uint64_t ring_gets = 0;
  std::uint64_t puts = 0;
};

/// Read-only window over shared memory, valid until the invocation ends.
class PayloadView {
 public:
  PayloadView(const std::byte* data, std::uint64_t length, std::shared_ptr<const std::uint64_t> epoch,
              std::uint64_t issued_epoch) noexcept
      : data_(data), length_(length), epoch_(std::move(epoch)), issued_(issued_epoch) {}

  std::uint64_t size() const noexcept { return length_; }
  bool valid() const noexcept { return *epoch_ == issued_; }
  /// Throws IllegalState once the invocation that produced it has ended.
  ByteSpan bytes() const;

 private:
  const std::byte* data_;
  std::uint64_t length_;
  std::shared_ptr<const std::uint64_t> epoch_;
  std::uint64_t issued_;
};

/// Pull-based body source for bodies that are not a contiguous view.
class BodyStream {
 public:
  virtual ~BodyStream() = default;
  virtual std::uint64_t size() const = 0;
  /// Copies up to out.size() bytes; 0 at the end of the body.
  virtual std::size_t read(MutableByteSpan out) = 0;
};

/// What get_object hands the handler: either a zero-copy view or a stream.
class ObjectBody {
 public:
  explicit ObjectBody(PayloadView view) : view_(std::move(view)) {}
  explicit ObjectBody(std::unique_ptr<BodyStream> stream) : stream_(std::move(stream)) {}
  explicit ObjectBody(Bytes owned) : owned_(std::move(owned)) {}

  bool is_view() const noexcept { return view_.has_value(); }
  std::uint64_t size() const;
  /// Sequential read, works for every body kind.
  std::size_t read(MutableByteSpan out);
  /// Contiguous bytes. Zero-copy for views and owned buffers; a stream is
  /// drained into an owned buffer first.
  ByteSpan contiguous();

 private:
  std::optional<PayloadView> view_;
  std::unique_ptr<BodyStream> stream_;
  std::optional<Bytes> owned_;
  std::uint64_t pos_ = 0;
};

/// The SDK surface the handler programs against; the same handler body
/// runs over a direct store connection or the remoted session.
class ObjectClient {
 public:
  virtual ~ObjectClient() = default;
  /// Throws NotFound for an absent object.
  virtual ObjectBody get_object(const ObjectRef& ref) = 0;
  /// Returns the store version, or 0 when the write was delegated.
  virtual std::uint64_t put_object(const ObjectRef& ref, ByteSpan data) = 0;
  virtual CopyCounters counters() const = 0;
};

}  // namespace nexus::frontend
