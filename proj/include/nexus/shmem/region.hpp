// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "nexus/common/bytes.hpp"

namespace nexus::shmem {

inline constexpr std::uint64_t kRegionMagic = 0x4E58'5553'4D45'4D30ULL;  // "0MEMSUXN" LE
inline constexpr std::uint32_t kRegionVersion = 1;
inline constexpr std::uint64_t kPageBytes = 4096;
inline constexpr std::uint64_t kHeaderBytes = 64;
inline constexpr std::uint64_t kSlotAlign = 64;
/// Ring control block: capacity and tail on one cache line, head on the next.
inline constexpr std::uint64_t kRingControlBytes = 128;

inline constexpr std::uint64_t kDefaultRegionCap = 256ull << 20;
inline constexpr std::uint64_t kDefaultRingCapacity = 4ull << 20;

enum class RegionMode : std::uint32_t { kSlot = 0, kRing = 1 };

/// Resident at offset 0 of every region file. Written once by the backend;
/// read-only to the guest except for the ring counters.
struct RegionHeader {
  std::uint64_t magic;
  std::uint32_t version;
  std::uint32_t mode;
  std::uint64_t alloc_cursor;
  std::uint64_t ring_area_offset;  // 0 in SLOT mode
  std::uint64_t ring_capacity;     // 0 in SLOT mode
  std::uint64_t region_size;
  std::uint64_t region_id;
  std::uint64_t reserved;
};
static_assert(sizeof(RegionHeader) == kHeaderBytes);

struct RegionDescriptor {
  std::uint64_t region_id = 0;
  std::string file_name;
  std::uint64_t size_bytes = 0;
};

struct RegionLimits {
  std::uint64_t cap_bytes = kDefaultRegionCap;
  std::uint64_t ring_capacity = kDefaultRingCapacity;
};

constexpr std::uint64_t round_up(std::uint64_t v, std::uint64_t align) noexcept {
  return (v + align - 1) / align * align;
}

std::string region_file_name(std::uint64_t region_id);

/// A file-backed MAP_SHARED mapping. The creating side owns the file and
/// unlinks it on destruction; attaching sides only unmap.
class MappedRegion {
 public:
  MappedRegion() = default;
  MappedRegion(MappedRegion&& other) noexcept;
  MappedRegion& operator=(MappedRegion&& other) noexcept;
  MappedRegion(const MappedRegion&) = delete;
  MappedRegion& operator=(const MappedRegion&) = delete;
  ~MappedRegion();

  /// Attaches an existing region and validates magic and version.
  /// Throws AttachError.
  static MappedRegion attach(const std::filesystem::path& path);

  bool valid() const noexcept { return base_ != nullptr; }
  std::byte* base() const noexcept { return base_; }
  std::uint64_t size() const noexcept { return size_; }
  const RegionHeader& header() const noexcept { return *reinterpret_cast<const RegionHeader*>(base_); }
  RegionMode mode() const noexcept { return static_cast<RegionMode>(header().mode); }
  RegionDescriptor descriptor() const;
  const std::filesystem::path& path() const noexcept { return path_; }

  /// First byte past the slot area.
  std::uint64_t slot_limit() const noexcept;
  std::byte* ring_area() const noexcept;

  /// Bounds-checked window; throws RegionFull if [offset, offset+length)
  /// leaves the mapping.
  MutableByteSpan window(std::uint64_t offset, std::uint64_t length) const;

 private:
  friend MappedRegion create_region(const std::filesystem::path&, std::uint64_t, std::uint64_t,
                                    RegionMode, const RegionLimits&);
  void unmap() noexcept;

  std::byte* base_ = nullptr;
  std::uint64_t size_ = 0;
  std::filesystem::path path_;
  bool owner_ = false;
};

/// Creates `dir`/nexus-region-<id>. `size_bytes` covers the header and slot
/// area and is rounded up to the page size; RING mode appends a
/// page-aligned ring area. Throws CapacityExceeded above `limits.cap_bytes`
/// and FilesystemError on I/O failure.
MappedRegion create_region(const std::filesystem::path& dir, std::uint64_t region_id,
                           std::uint64_t size_bytes, RegionMode mode,
                           const RegionLimits& limits = {});

/// (offset, length) window granted by the backend.
struct SlotGrant {
  std::uint64_t region_id = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t checksum = 0;

  std::uint64_t end() const noexcept { return offset + length; }
  friend bool operator==(const SlotGrant&, const SlotGrant&) = default;
};

/// Backend-private bump allocator over a region's slot area. Grants are
/// 64-byte aligned and stay live until released; reset() rewinds the cursor
/// to just past the highest live grant so pinned windows (pending writes)
/// survive a new invocation.
class SlotAllocator {
 public:
  explicit SlotAllocator(MappedRegion& region);

  /// Throws RegionFull when the aligned length does not fit.
  SlotGrant grant(std::uint64_t length);
  void release(const SlotGrant& g);
  void reset();

  std::uint64_t cursor() const;
  std::uint64_t remaining() const;
  std::uint64_t high_water() const;
  std::size_t live_count() const;
  /// True iff no two live grants overlap and all lie inside the slot area.
  bool audit() const;

 private:
  MappedRegion& region_;
  mutable std::mutex mu_;
  std::uint64_t cursor_ = kHeaderBytes;
  std::uint64_t high_water_ = kHeaderBytes;
  std::multimap<std::uint64_t, std::uint64_t> live_;  // offset -> length
};

/// FNV-1a-64 of the grant's window.
std::uint64_t slot_checksum(const SlotGrant& grant, const MappedRegion& region);
/// Fills grant.checksum from the current window contents.
void seal_slot(SlotGrant& grant, const MappedRegion& region);
bool verify_slot(const SlotGrant& grant, const MappedRegion& region);

}  // namespace nexus::shmem
