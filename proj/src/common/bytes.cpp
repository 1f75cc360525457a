// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/common/bytes.hpp"

#include <limits>

namespace nexus {

ByteWriter& ByteWriter::str16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::kSchemaError, "string field longer than 65535 bytes");
  }
  put(static_cast<std::uint16_t>(s.size()));
  return raw(as_bytes(s));
}

ByteWriter& ByteWriter::blob32(ByteSpan bytes) {
  if (bytes.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::kSchemaError, "blob field longer than 4 GiB");
  }
  put(static_cast<std::uint32_t>(bytes.size()));
  return raw(bytes);
}

ByteSpan ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw Error(Errc::kTruncatedFrame, "message body ends early");
  }
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::string ByteReader::str16() {
  auto n = get<std::uint16_t>();
  auto b = take(n);
  return std::string(as_chars(b));
}

Bytes ByteReader::blob32() {
  auto n = get<std::uint32_t>();
  auto b = take(n);
  return {b.begin(), b.end()};
}

}  // namespace nexus
