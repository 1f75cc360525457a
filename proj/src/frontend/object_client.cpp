// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/frontend/object_client.hpp"

#include <algorithm>
#include <cstring>

#include "nexus/common/error.hpp"

namespace nexus::frontend {

ByteSpan PayloadView::bytes() const {
  if (!valid()) throw Error(Errc::kIllegalState, "payload view used after its invocation ended");
  return {data_, length_};
}

std::uint64_t ObjectBody::size() const {
  if (view_) return view_->size();
  if (owned_) return owned_->size();
  return stream_->size();
}

std::size_t ObjectBody::read(MutableByteSpan out) {
  if (stream_ && !owned_) return stream_->read(out);
  ByteSpan all = view_ ? view_->bytes() : ByteSpan(*owned_);
  auto n = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), all.size() - pos_));
  if (n > 0) std::memcpy(out.data(), all.data() + pos_, n);
  pos_ += n;
  return n;
}

ByteSpan ObjectBody::contiguous() {
  if (view_) return view_->bytes();
  if (!owned_) {
    Bytes buf(stream_->size());
    std::size_t got = 0;
    while (got < buf.size()) {
      auto n = stream_->read(MutableByteSpan(buf).subspan(got));
      if (n == 0) throw Error(Errc::kTransportError, "body ended early");
      got += n;
    }
    owned_ = std::move(buf);
  }
  return *owned_;
}

}  // namespace nexus::frontend
