// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nexus/common/error.hpp"

namespace nexus {

using Bytes = std::vector<std::byte>;
using ByteSpan = std::span<const std::byte>;
using MutableByteSpan = std::span<std::byte>;

static_assert(std::endian::native == std::endian::little,
              "wire and region layouts assume a little-endian host");

inline ByteSpan as_bytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::byte*>(s.data()), s.size()};
}

inline std::string_view as_chars(ByteSpan b) noexcept {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

inline Bytes to_bytes(std::string_view s) {
  auto b = as_bytes(s);
  return {b.begin(), b.end()};
}

/// Appends little-endian scalars and length-prefixed strings to a buffer.
class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  template <typename T>
    requires std::is_integral_v<T>
  ByteWriter& put(T value) {
    std::byte raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    out_.insert(out_.end(), raw, raw + sizeof(T));
    return *this;
  }

  ByteWriter& raw(ByteSpan bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
    return *this;
  }

  /// u16 length followed by the bytes.
  ByteWriter& str16(std::string_view s);
  /// u32 length followed by the bytes.
  ByteWriter& blob32(ByteSpan bytes);

 private:
  Bytes& out_;
};

/// Bounds-checked little-endian cursor over a message body. Running past the
/// end raises TruncatedFrame.
class ByteReader {
 public:
  explicit ByteReader(ByteSpan in) : in_(in) {}

  template <typename T>
    requires std::is_integral_v<T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
    return value;
  }

  ByteSpan take(std::size_t n);
  std::string str16();
  Bytes blob32();

  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  bool done() const noexcept { return remaining() == 0; }

 private:
  ByteSpan in_;
  std::size_t pos_ = 0;
};

}  // namespace nexus
