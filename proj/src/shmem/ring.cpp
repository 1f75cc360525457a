// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/shmem/ring.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

#include "nexus/shmem/region.hpp"

namespace nexus::shmem {
namespace {

constexpr std::size_t kTailOffset = 8;
constexpr std::size_t kHeadOffset = 64;

using AtomicWord = std::atomic_ref<std::uint64_t>;
static_assert(AtomicWord::is_always_lock_free, "ring counters must be lock-free across processes");

}  // namespace

RingView::RingView(std::byte* area) noexcept : area_(area) {
  std::memcpy(&capacity_, area_, sizeof(capacity_));
}

void RingView::initialize(std::byte* area, std::uint64_t capacity) noexcept {
  std::memcpy(area, &capacity, sizeof(capacity));
  std::memset(area + kTailOffset, 0, sizeof(std::uint64_t));
  std::memset(area + kHeadOffset, 0, sizeof(std::uint64_t));
}

std::uint64_t& RingView::head_word() const noexcept {
  return *reinterpret_cast<std::uint64_t*>(area_ + kHeadOffset);
}

std::uint64_t& RingView::tail_word() const noexcept {
  return *reinterpret_cast<std::uint64_t*>(area_ + kTailOffset);
}

std::byte* RingView::data() const noexcept { return area_ + kRingControlBytes; }

std::uint64_t RingView::write(ByteSpan src) noexcept {
  const auto head = AtomicWord(head_word()).load(std::memory_order_acquire);
  const auto tail = AtomicWord(tail_word()).load(std::memory_order_relaxed);
  assert(tail - head <= capacity_);
  const auto n = std::min<std::uint64_t>(src.size(), capacity_ - (tail - head));
  if (n == 0) return 0;
  const auto mask = capacity_ - 1;
  const auto start = tail & mask;
  const auto first = std::min(n, capacity_ - start);
  std::memcpy(data() + start, src.data(), first);
  std::memcpy(data(), src.data() + first, n - first);
  AtomicWord(tail_word()).store(tail + n, std::memory_order_release);
  return n;
}

std::uint64_t RingView::read(MutableByteSpan dst) noexcept {
  const auto tail = AtomicWord(tail_word()).load(std::memory_order_acquire);
  const auto head = AtomicWord(head_word()).load(std::memory_order_relaxed);
  assert(tail - head <= capacity_);
  const auto n = std::min<std::uint64_t>(dst.size(), tail - head);
  if (n == 0) return 0;
  const auto mask = capacity_ - 1;
  const auto start = head & mask;
  const auto first = std::min(n, capacity_ - start);
  std::memcpy(dst.data(), data() + start, first);
  std::memcpy(dst.data() + first, data(), n - first);
  AtomicWord(head_word()).store(head + n, std::memory_order_release);
  return n;
}

Bytes RingView::read(std::uint64_t max) {
  Bytes out(std::min(max, fill()));
  out.resize(read(MutableByteSpan(out)));
  return out;
}

std::uint64_t RingView::head() const noexcept {
  return AtomicWord(head_word()).load(std::memory_order_acquire);
}

std::uint64_t RingView::tail() const noexcept {
  return AtomicWord(tail_word()).load(std::memory_order_acquire);
}

std::uint64_t RingView::fill() const noexcept {
  // Load head first: tail only grows, so tail - head cannot underflow.
  const auto h = head();
  return tail() - h;
}

}  // namespace nexus::shmem
