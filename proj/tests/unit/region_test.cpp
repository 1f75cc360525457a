// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <random>

#include "nexus/common/fnv.hpp"
#include "nexus/shmem/region.hpp"

namespace nexus::shmem {
namespace {

namespace fs = std::filesystem;

class RegionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nexus-region-test-" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64(as_bytes("a")), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64(as_bytes("foobar")), 0x85944171f73967e8ULL);
}

TEST_F(RegionTest, PageRounding) {
  auto r = create_region(dir_, 1, (1u << 20) + kHeaderBytes, RegionMode::kSlot);
  EXPECT_EQ(r.size(), 1052672u);
  EXPECT_EQ(r.descriptor().size_bytes % kPageBytes, 0u);
  EXPECT_EQ(fs::path(r.descriptor().file_name).filename(), "nexus-region-1");
  EXPECT_EQ(r.header().alloc_cursor, kHeaderBytes);
  EXPECT_EQ(r.header().magic, kRegionMagic);
}

TEST_F(RegionTest, ZeroSizeHintGivesOnePageAndEmptyGrant) {
  auto r = create_region(dir_, 2, 0, RegionMode::kSlot);
  EXPECT_EQ(r.size(), kPageBytes);
  SlotAllocator alloc(r);
  auto g = alloc.grant(0);
  EXPECT_EQ(g.offset, kHeaderBytes);
  EXPECT_EQ(g.length, 0u);
  seal_slot(g, r);
  EXPECT_TRUE(verify_slot(g, r));
}

TEST_F(RegionTest, CapIsEnforced) {
  try {
    create_region(dir_, 3, (256u << 20) + 1, RegionMode::kSlot);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kCapacityExceeded);
  }
  EXPECT_NO_THROW(create_region(dir_, 4, 256u << 20, RegionMode::kSlot));
}

TEST_F(RegionTest, RingModeAppendsRingArea) {
  auto r = create_region(dir_, 5, 8192, RegionMode::kRing, {.cap_bytes = kDefaultRegionCap, .ring_capacity = 1 << 16});
  EXPECT_EQ(r.header().ring_area_offset, 8192u);
  EXPECT_EQ(r.header().ring_capacity, 1u << 16);
  EXPECT_EQ(r.size(), round_up(8192 + kRingControlBytes + (1 << 16), kPageBytes));
  EXPECT_EQ(r.slot_limit(), 8192u);
}

TEST_F(RegionTest, GrantAlignmentAndOffsets) {
  auto r = create_region(dir_, 6, 4096, RegionMode::kSlot);
  SlotAllocator alloc(r);
  auto a = alloc.grant(100);
  auto b = alloc.grant(100);
  EXPECT_EQ(a.offset, 64u);
  EXPECT_EQ(a.length, 100u);
  EXPECT_EQ(b.offset, 64u + 128u);
  EXPECT_TRUE(alloc.audit());
}

TEST_F(RegionTest, RegionFull) {
  auto r = create_region(dir_, 7, 4096, RegionMode::kSlot);
  SlotAllocator alloc(r);
  alloc.grant(4096 - 64);
  try {
    alloc.grant(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRegionFull);
  }
}

TEST_F(RegionTest, ResetKeepsLiveGrantsPinned) {
  auto r = create_region(dir_, 8, 1 << 16, RegionMode::kSlot);
  SlotAllocator alloc(r);
  auto get = alloc.grant(1000);
  auto pinned = alloc.grant(500);
  alloc.release(get);
  alloc.reset();
  EXPECT_EQ(alloc.cursor(), pinned.offset + round_up(500, kSlotAlign));
  alloc.release(pinned);
  alloc.reset();
  EXPECT_EQ(alloc.cursor(), kHeaderBytes);
}

TEST_F(RegionTest, RandomGrantsNeverOverlap) {
  auto r = create_region(dir_, 9, 1 << 20, RegionMode::kSlot);
  SlotAllocator alloc(r);
  std::mt19937_64 rng(11);
  std::vector<SlotGrant> live;
  for (int step = 0; step < 5000; ++step) {
    if (!live.empty() && rng() % 3 == 0) {
      auto i = rng() % live.size();
      alloc.release(live[i]);
      live.erase(live.begin() + static_cast<long>(i));
    } else if (rng() % 50 == 0) {
      alloc.reset();
    } else {
      try {
        live.push_back(alloc.grant(rng() % 20000));
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), Errc::kRegionFull);
        alloc.reset();
      }
    }
    ASSERT_TRUE(alloc.audit()) << "step " << step;
  }
}

TEST_F(RegionTest, ChecksumDetectsTamper) {
  auto r = create_region(dir_, 10, 1 << 20, RegionMode::kSlot);
  SlotAllocator alloc(r);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    if (alloc.remaining() < 4096) alloc.reset();
    auto g = alloc.grant(1 + rng() % 2048);
    auto w = r.window(g.offset, g.length);
    for (auto& b : w) b = static_cast<std::byte>(rng());
    seal_slot(g, r);
    ASSERT_TRUE(verify_slot(g, r));
    auto pos = rng() % g.length;
    w[pos] ^= std::byte{1u} << (rng() % 8);
    ASSERT_FALSE(verify_slot(g, r));
    alloc.release(g);
  }
}

TEST_F(RegionTest, AttachValidatesHeader) {
  auto r = create_region(dir_, 11, 4096, RegionMode::kSlot);
  auto a = MappedRegion::attach(r.path());
  EXPECT_EQ(a.header().region_id, 11u);
  std::memset(r.base(), 0x5A, 8);
  try {
    MappedRegion::attach(r.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kAttachError);
  }
}

TEST_F(RegionTest, OwnerUnlinksOnDestruction) {
  fs::path p;
  {
    auto r = create_region(dir_, 12, 4096, RegionMode::kSlot);
    p = r.path();
    EXPECT_TRUE(fs::exists(p));
  }
  EXPECT_FALSE(fs::exists(p));
}

TEST_F(RegionTest, SharedAcrossProcesses) {
  auto r = create_region(dir_, 13, 4096, RegionMode::kSlot);
  SlotAllocator alloc(r);
  auto g = alloc.grant(5);
  pid_t pid = ::fork();
  if (pid == 0) {
    auto a = MappedRegion::attach(r.path());
    std::memcpy(a.window(g.offset, 5).data(), "hello", 5);
    ::_exit(0);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(as_chars(r.window(g.offset, 5)), "hello");
}

}  // namespace
}  // namespace nexus::shmem
