// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/shmem/region.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cerrno>
#include <cstring>
#include <fmt/format.h>
#include <vector>

#include "nexus/common/fnv.hpp"
#include "nexus/net/socket.hpp"
#include "nexus/shmem/ring.hpp"

namespace nexus::shmem {
namespace {

std::byte* map_fd(int fd, std::uint64_t size, Errc on_error) {
  void* p = ::mmap(nullptr, size, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
  if (p == MAP_FAILED) throw Error(on_error, fmt::format("mmap: {}", std::strerror(errno)));
  return static_cast<std::byte*>(p);
}

}  // namespace

std::string region_file_name(std::uint64_t region_id) {
  return fmt::format("nexus-region-{}", region_id);
}

MappedRegion::MappedRegion(MappedRegion&& other) noexcept
    : base_(std::exchange(other.base_, nullptr)),
      size_(std::exchange(other.size_, 0)),
      path_(std::move(other.path_)),
      owner_(std::exchange(other.owner_, false)) {}

MappedRegion& MappedRegion::operator=(MappedRegion&& other) noexcept {
  if (this != &other) {
    unmap();
    base_ = std::exchange(other.base_, nullptr);
    size_ = std::exchange(other.size_, 0);
    path_ = std::move(other.path_);
    owner_ = std::exchange(other.owner_, false);
  }
  return *this;
}

MappedRegion::~MappedRegion() { unmap(); }

void MappedRegion::unmap() noexcept {
  if (base_ != nullptr) ::munmap(base_, size_);
  if (owner_ && !path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  base_ = nullptr;
  size_ = 0;
  owner_ = false;
}

MappedRegion MappedRegion::attach(const std::filesystem::path& path) {
  net::Fd fd(::open(path.c_str(), O_RDWR | O_CLOEXEC));
  if (!fd) throw Error(Errc::kAttachError, fmt::format("open {}: {}", path.string(), std::strerror(errno)));
  struct stat st {};
  if (::fstat(fd.get(), &st) != 0 || static_cast<std::uint64_t>(st.st_size) < kHeaderBytes) {
    throw Error(Errc::kAttachError, fmt::format("{} is smaller than a region header", path.string()));
  }
  MappedRegion r;
  r.size_ = static_cast<std::uint64_t>(st.st_size);
  r.base_ = map_fd(fd.get(), r.size_, Errc::kAttachError);
  r.path_ = path;
  const auto& h = r.header();
  if (h.magic != kRegionMagic) {
    throw Error(Errc::kAttachError, fmt::format("bad region magic {:#018x}", h.magic));
  }
  if (h.version != kRegionVersion) {
    throw Error(Errc::kAttachError, fmt::format("unsupported region version {}", h.version));
  }
  if (h.region_size != r.size_ || h.ring_area_offset + (h.ring_capacity ? kRingControlBytes : 0) +
                                          h.ring_capacity > r.size_) {
    throw Error(Errc::kAttachError, "region header disagrees with file size");
  }
  return r;
}

RegionDescriptor MappedRegion::descriptor() const {
  return {header().region_id, path_.string(), size_};
}

std::uint64_t MappedRegion::slot_limit() const noexcept {
  return mode() == RegionMode::kRing ? header().ring_area_offset : size_;
}

std::byte* MappedRegion::ring_area() const noexcept {
  return mode() == RegionMode::kRing ? base_ + header().ring_area_offset : nullptr;
}

MutableByteSpan MappedRegion::window(std::uint64_t offset, std::uint64_t length) const {
  if (offset > size_ || length > size_ - offset) {
    throw Error(Errc::kRegionFull,
                fmt::format("window [{}, +{}) outside region of {} bytes", offset, length, size_));
  }
  return {base_ + offset, length};
}

MappedRegion create_region(const std::filesystem::path& dir, std::uint64_t region_id,
                           std::uint64_t size_bytes, RegionMode mode, const RegionLimits& limits) {
  std::uint64_t slot_end = round_up(std::max(size_bytes, kHeaderBytes), kPageBytes);
  std::uint64_t total = slot_end;
  std::uint64_t ring_capacity = 0;
  if (mode == RegionMode::kRing) {
    ring_capacity = limits.ring_capacity;
    if (ring_capacity == 0 || !std::has_single_bit(ring_capacity)) {
      throw Error(Errc::kCapacityExceeded, "ring capacity must be a power of two");
    }
    total = round_up(slot_end + kRingControlBytes + ring_capacity, kPageBytes);
  }
  if (total > limits.cap_bytes) {
    throw Error(Errc::kCapacityExceeded,
                fmt::format("region of {} bytes exceeds the {} byte cap", total, limits.cap_bytes));
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto path = dir / region_file_name(region_id);
  net::Fd fd(::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC | O_CLOEXEC, 0600));
  if (!fd) {
    throw Error(Errc::kFilesystemError, fmt::format("create {}: {}", path.string(), std::strerror(errno)));
  }
  if (::ftruncate(fd.get(), static_cast<off_t>(total)) != 0) {
    throw Error(Errc::kFilesystemError, fmt::format("ftruncate {}: {}", path.string(), std::strerror(errno)));
  }
  MappedRegion r;
  r.base_ = map_fd(fd.get(), total, Errc::kFilesystemError);
  r.size_ = total;
  r.path_ = path;
  r.owner_ = true;

  auto* h = reinterpret_cast<RegionHeader*>(r.base_);
  h->version = kRegionVersion;
  h->mode = static_cast<std::uint32_t>(mode);
  h->alloc_cursor = kHeaderBytes;
  h->ring_area_offset = mode == RegionMode::kRing ? slot_end : 0;
  h->ring_capacity = ring_capacity;
  h->region_size = total;
  h->region_id = region_id;
  h->reserved = 0;
  if (mode == RegionMode::kRing) RingView::initialize(r.base_ + slot_end, ring_capacity);
  // Magic last: an attacher that sees it sees a complete header.
  std::atomic_ref<std::uint64_t>(h->magic).store(kRegionMagic, std::memory_order_release);
  return r;
}

SlotAllocator::SlotAllocator(MappedRegion& region) : region_(region) {}

SlotGrant SlotAllocator::grant(std::uint64_t length) {
  std::lock_guard lock(mu_);
  std::uint64_t aligned = round_up(length, kSlotAlign);
  std::uint64_t limit = region_.slot_limit();
  if (cursor_ > limit || aligned > limit - cursor_) {
    throw Error(Errc::kRegionFull, fmt::format("need {} bytes, {} left in slot area", aligned,
                                               cursor_ > limit ? 0 : limit - cursor_));
  }
  SlotGrant g{region_.header().region_id, cursor_, length, 0};
  cursor_ += aligned;
  high_water_ = std::max(high_water_, cursor_);
  live_.emplace(g.offset, g.length);
  reinterpret_cast<RegionHeader*>(region_.base())->alloc_cursor = cursor_;
  return g;
}

void SlotAllocator::release(const SlotGrant& g) {
  std::lock_guard lock(mu_);
  auto [lo, hi] = live_.equal_range(g.offset);
  for (auto it = lo; it != hi; ++it) {
    if (it->second == g.length) {
      live_.erase(it);
      return;
    }
  }
}

void SlotAllocator::reset() {
  std::lock_guard lock(mu_);
  std::uint64_t end = kHeaderBytes;
  for (auto [off, len] : live_) end = std::max(end, off + round_up(len, kSlotAlign));
  cursor_ = end;
  reinterpret_cast<RegionHeader*>(region_.base())->alloc_cursor = cursor_;
}

std::uint64_t SlotAllocator::cursor() const {
  std::lock_guard lock(mu_);
  return cursor_;
}

std::uint64_t SlotAllocator::remaining() const {
  std::lock_guard lock(mu_);
  auto limit = region_.slot_limit();
  return cursor_ >= limit ? 0 : limit - cursor_;
}

std::uint64_t SlotAllocator::high_water() const {
  std::lock_guard lock(mu_);
  return high_water_;
}

std::size_t SlotAllocator::live_count() const {
  std::lock_guard lock(mu_);
  return live_.size();
}

bool SlotAllocator::audit() const {
  std::lock_guard lock(mu_);
  std::uint64_t prev_end = kHeaderBytes;
  for (auto [off, len] : live_) {
    if (len == 0) continue;
    if (off < prev_end || off % kSlotAlign != 0) return false;
    prev_end = off + len;
  }
  return prev_end <= region_.slot_limit();
}

std::uint64_t slot_checksum(const SlotGrant& grant, const MappedRegion& region) {
  return fnv1a64(region.window(grant.offset, grant.length));
}

void seal_slot(SlotGrant& grant, const MappedRegion& region) {
  grant.checksum = slot_checksum(grant, region);
}

bool verify_slot(const SlotGrant& grant, const MappedRegion& region) {
  return slot_checksum(grant, region) == grant.checksum;
}

}  // namespace nexus::shmem
