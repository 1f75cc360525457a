// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <json.hpp>

#include <atomic>
#include <random>
#include <thread>

#include "nexus/backend/admission.hpp"
#include "nexus/backend/config.hpp"
#include "nexus/backend/credentials.hpp"
#include "nexus/backend/faults.hpp"
#include "nexus/backend/metrics.hpp"
#include "nexus/backend/rate_limiter.hpp"
#include "nexus/backend/writeback.hpp"
#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/common/token_bucket.hpp"

namespace nexus::backend {
namespace {

// ---------------------------------------------------------------- tokens

TEST(TokenBucket, StartsEmptyAndPacesAtRate) {
  // 8 Mbps = 1 MB/s; 200 KB from empty takes 200 ms.
  TokenBucket b(8'000'000, 1'000'000);
  auto t0 = now_us();
  b.acquire(200'000);
  auto dt = now_us() - t0;
  EXPECT_GE(dt, 190'000u);
  EXPECT_LE(dt, 260'000u);
}

TEST(TokenBucket, ZeroIsImmediate) {
  TokenBucket b(8, 1);
  auto t0 = now_us();
  b.acquire(0);
  EXPECT_LT(now_us() - t0, 1000u);
}

TEST(TokenBucket, StartFullAllowsOneBurst) {
  TokenBucket b(8'000'000, 100'000, true);
  auto t0 = now_us();
  b.acquire(100'000);
  EXPECT_LT(now_us() - t0, 10'000u);
}

TEST(TokenBucket, ReservationsQueueInOrder) {
  TokenBucket b(8'000'000, 1'000'000);
  auto base = now_us();
  auto r1 = b.reserve(100'000);
  auto r2 = b.reserve(100'000);
  EXPECT_NEAR(static_cast<double>(r1 - base), 100'000.0, 5'000.0);
  EXPECT_NEAR(static_cast<double>(r2 - r1), 100'000.0, 1'000.0);
}

// ----------------------------------------------------------- rate limiter

TEST(RateLimiter, ShareIsRateOverClients) {
  RateLimiter rl;
  rl.configure("f", 600'000'000, {"a", "b"});
  EXPECT_EQ(rl.share_bps("f"), 300'000'000u);
  rl.configure("g", 600'000'000, {"s3"});
  EXPECT_EQ(rl.share_bps("g"), 600'000'000u);
}

TEST(RateLimiter, ClientForPrefersBucketName) {
  RateLimiter rl;
  rl.configure("f", 1000, {"s3", "logs"});
  EXPECT_EQ(rl.client_for("f", "logs"), "logs");
  EXPECT_EQ(rl.client_for("f", "other"), "s3");
  EXPECT_THROW(rl.client_for("nope", "x"), Error);
}

TEST(RateLimiter, ClientsAreIndependent) {
  // 16 Mbps over 2 clients: 1 MB/s each. 100 KB on each concurrently takes
  // ~100 ms, not 200.
  RateLimiter rl;
  rl.configure("f", 16'000'000, {"a", "b"});
  auto t0 = now_us();
  std::thread t([&] { rl.acquire("f", "a", 100'000); });
  rl.acquire("f", "b", 100'000);
  t.join();
  auto dt = now_us() - t0;
  EXPECT_GE(dt, 95'000u);
  EXPECT_LT(dt, 160'000u);
  EXPECT_EQ(rl.stats("f", "a").bytes, 100'000u);
}

TEST(RateLimiter, ReloadWithSameShareKeepsBuckets) {
  RateLimiter rl;
  rl.configure("f", 8'000'000, {"a"});
  rl.acquire("f", "a", 10'000);
  rl.configure("f", 8'000'000, {"a"});
  EXPECT_EQ(rl.stats("f", "a").bytes, 10'000u);
  rl.configure("f", 16'000'000, {"a"});
  EXPECT_EQ(rl.stats("f", "a").bytes, 0u);
}

TEST(RateLimiter, ZeroBytesNeverBlocks) {
  RateLimiter rl;
  rl.configure("f", 8, {"a"});
  auto t0 = now_us();
  rl.acquire("f", "a", 0);
  EXPECT_LT(now_us() - t0, 1000u);
}

// --------------------------------------------------------- response buffer

struct Captured {
  int releases = 0;
  proto::IngressResponse last;
};

ResponseBuffer make_buffer(Captured& c) {
  return ResponseBuffer([&c](proto::IngressResponse& r) {
    c.releases++;
    c.last = r;
  });
}

proto::IngressResponse ok_response() {
  proto::IngressResponse r;
  r.ok = true;
  r.payload = to_bytes("hello");
  return r;
}

TEST(ResponseBuffer, NoPendingReleasesOnHold) {
  Captured c;
  auto b = make_buffer(c);
  b.hold(ok_response());
  EXPECT_EQ(c.releases, 1);
  EXPECT_TRUE(c.last.ok);
  EXPECT_EQ(b.outcome(), ResponseBuffer::Outcome::kReleasedOk);
}

TEST(ResponseBuffer, HeldUntilLastAck) {
  Captured c;
  auto b = make_buffer(c);
  b.add_pending();
  b.add_pending();
  b.hold(ok_response());
  EXPECT_EQ(c.releases, 0);
  b.write_acked(100);
  EXPECT_EQ(c.releases, 0);
  b.write_acked(250);
  EXPECT_EQ(c.releases, 1);
  EXPECT_TRUE(c.last.ok);
  EXPECT_EQ(c.last.timestamps_us.last_write_ack, 250u);
}

TEST(ResponseBuffer, AcksBeforeHoldReleaseAtHold) {
  Captured c;
  auto b = make_buffer(c);
  b.add_pending();
  b.write_acked(7);
  EXPECT_EQ(c.releases, 0);
  b.hold(ok_response());
  EXPECT_EQ(c.releases, 1);
}

TEST(ResponseBuffer, AnyFailureReleasesError) {
  Captured c;
  auto b = make_buffer(c);
  b.add_pending();
  b.add_pending();
  b.hold(ok_response());
  b.write_failed("boom");
  EXPECT_EQ(c.releases, 1);
  EXPECT_FALSE(c.last.ok);
  EXPECT_NE(c.last.error.find("boom"), std::string::npos);
  EXPECT_TRUE(c.last.payload.empty());
  b.write_acked(9);  // the straggler changes nothing
  EXPECT_EQ(c.releases, 1);
  EXPECT_EQ(b.outcome(), ResponseBuffer::Outcome::kReleasedError);
}

TEST(ResponseBuffer, FailureBeforeHoldFailsAtHold) {
  Captured c;
  auto b = make_buffer(c);
  b.add_pending();
  b.write_failed("early");
  EXPECT_EQ(c.releases, 0);
  b.hold(ok_response());
  EXPECT_EQ(c.releases, 1);
  EXPECT_FALSE(c.last.ok);
}

TEST(ResponseBuffer, FailNowIsFinal) {
  Captured c;
  auto b = make_buffer(c);
  b.fail_now(ok_response());
  b.fail_now(ok_response());
  b.hold(ok_response());
  EXPECT_EQ(c.releases, 1);
  EXPECT_FALSE(c.last.ok);
}

// Property: over random interleavings of acks, failures and the hold, the
// buffer releases exactly once, and ok iff nothing failed.
TEST(ResponseBuffer, ExactlyOneReleaseProperty) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    Captured c;
    auto b = make_buffer(c);
    const int writes = static_cast<int>(rng() % 5);
    for (int i = 0; i < writes; ++i) b.add_pending();
    std::vector<int> events(writes, 0);  // 0 ack, 1 fail
    bool any_fail = false;
    for (auto& e : events) {
      e = (rng() % 6 == 0) ? 1 : 0;
      any_fail |= e == 1;
    }
    events.push_back(2);  // hold
    std::shuffle(events.begin(), events.end(), rng);
    std::uint64_t t = 0, max_ack = 0;
    for (int e : events) {
      if (e == 0) {
        b.write_acked(++t);
        max_ack = t;
      } else if (e == 1) {
        b.write_failed("x");
      } else {
        b.hold(ok_response());
      }
    }
    ASSERT_EQ(c.releases, 1) << "trial " << trial;
    ASSERT_EQ(c.last.ok, !any_fail) << "trial " << trial;
    if (!any_fail) ASSERT_EQ(c.last.timestamps_us.last_write_ack, max_ack);
  }
}

TEST(ResponseBuffer, ConcurrentAcksReleaseOnce) {
  for (int trial = 0; trial < 50; ++trial) {
    std::atomic<int> releases{0};
    ResponseBuffer b([&](proto::IngressResponse&) { releases++; });
    constexpr int kWrites = 8;
    for (int i = 0; i < kWrites; ++i) b.add_pending();
    std::vector<std::thread> ts;
    for (int i = 0; i < kWrites; ++i) ts.emplace_back([&, i] { b.write_acked(i + 1); });
    b.hold(ok_response());
    for (auto& t : ts) t.join();
    ASSERT_EQ(releases.load(), 1);
  }
}

// ----------------------------------------------------------- credentials

TEST(Credentials, ResolveAndFingerprint) {
  CredentialStore cs;
  cs.set("f", "secret");
  EXPECT_EQ(cs.resolve("f"), "secret");
  EXPECT_THROW(cs.resolve("g"), Error);
  auto fp = cs.fingerprint("f");
  EXPECT_EQ(fp, token_fingerprint("secret"));
  EXPECT_EQ(fp.find("secret"), std::string::npos);
  EXPECT_NE(token_fingerprint("a"), token_fingerprint("b"));
  cs.erase("f");
  EXPECT_THROW(cs.resolve("f"), Error);
}

TEST(Credentials, ObserverSeesEveryResolve) {
  CredentialStore cs;
  std::vector<std::string> seen;
  cs.set_observer([&](const std::string& f, const std::string& t) { seen.push_back(f + "=" + t); });
  cs.set("f", "one");
  cs.resolve("f");
  cs.set("f", "two");
  cs.resolve("f");
  EXPECT_EQ(seen, (std::vector<std::string>{"f=one", "f=two"}));
}

// ------------------------------------------------------------------ faults

TEST(Faults, FiresOnNthReach) {
  FaultInjector fi;
  int fired = 0;
  fi.arm(FaultPoint::kDuringPrefetch, 3, [&] { fired++; });
  EXPECT_TRUE(fi.armed_for(FaultPoint::kDuringPrefetch));
  EXPECT_FALSE(fi.armed_for(FaultPoint::kPostFnResponsePreAck));
  EXPECT_FALSE(fi.reached(FaultPoint::kPostFnResponsePreAck));
  EXPECT_FALSE(fi.reached(FaultPoint::kDuringPrefetch));
  EXPECT_FALSE(fi.reached(FaultPoint::kDuringPrefetch));
  EXPECT_TRUE(fi.reached(FaultPoint::kDuringPrefetch));
  EXPECT_EQ(fired, 1);
  EXPECT_FALSE(fi.reached(FaultPoint::kDuringPrefetch));
  EXPECT_EQ(fired, 1);
}

TEST(Faults, ParseNames) {
  EXPECT_EQ(parse_fault_point("during-prefetch"), FaultPoint::kDuringPrefetch);
  EXPECT_EQ(parse_fault_point("post-fn-response-pre-ack"), FaultPoint::kPostFnResponsePreAck);
  EXPECT_EQ(fault_point_name(FaultPoint::kDuringPrefetch), "during-prefetch");
  EXPECT_THROW(parse_fault_point("elsewhere"), Error);
}

// ------------------------------------------------------------------ config

TEST(Config, DefaultsAndOverrides) {
  auto c = parse_config(R"({
    "mode": "offloaded",
    "max_active_sandboxes": 7,
    "restore": {"base_us": 1000, "per_page_us": 1},
    "functions": [
      {"name": "a", "credentials_token": "t", "rate_limit_bps": 1000},
      {"name": "b", "restore": {"base_us": 5}, "clients": ["x", "y"]}
    ]})");
  EXPECT_EQ(c.mode, sandbox::Mode::kOffloaded);
  EXPECT_EQ(c.max_active_sandboxes, 7u);
  EXPECT_EQ(c.writeback_retries, 2u);
  ASSERT_EQ(c.functions.size(), 2u);
  EXPECT_EQ(c.functions[0].restore.base_us, 1000u);
  EXPECT_EQ(c.functions[1].restore.base_us, 5u);
  EXPECT_EQ(c.functions[1].restore.per_page_us, 1u);  // inherited
  EXPECT_EQ(c.functions[1].rate_limit_bps, 600'000'000u);
  EXPECT_EQ(c.functions[1].clients, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(c.find("a")->credentials_token, "t");
  EXPECT_EQ(c.find("zz"), nullptr);
}

TEST(Config, DumpRoundTrips) {
  BackendConfig c;
  c.functions.push_back({"f", 123, "tok", {"s3"}, {1, 2, 3, 0.5}});
  c.default_restore.base_us = 77;
  auto back = parse_config(dump_config(c));
  EXPECT_EQ(dump_config(back), dump_config(c));
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config("[]"), Error);
  EXPECT_THROW(parse_config(R"({"functions": [{"rate_limit_bps": 1}]})"), Error);
  EXPECT_THROW(parse_config(R"({"max_active_sandboxes": -1})"), Error);
  EXPECT_THROW(parse_config(R"({"mode": "warp"})"), Error);
  EXPECT_THROW(parse_config(R"({"restore": {"offload_ws_reduction": 1.5}})"), Error);
  EXPECT_THROW(parse_config(R"({"functions": [{"name": "a"}, {"name": "a"}]})"), Error);
  try {
    parse_config(R"({"functions": [{"name": "a", "rate_limit_bps": "fast"}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("functions[0].rate_limit_bps"), std::string::npos);
  }
}

// --------------------------------------------------------------- admission

TEST(Admission, FifoAndCapacity) {
  Admission a(1);
  a.acquire();
  std::vector<int> order;
  std::mutex mu;
  std::vector<std::thread> ts;
  for (int i = 0; i < 4; ++i) {
    ts.emplace_back([&, i] {
      a.acquire();
      {
        std::lock_guard lock(mu);
        order.push_back(i);
      }
      a.release();
    });
    // Stagger arrivals so the ticket order is known.
    while (a.waiting() < static_cast<std::size_t>(i + 1)) std::this_thread::yield();
  }
  EXPECT_EQ(a.active(), 1u);
  a.release();
  for (auto& t : ts) t.join();
  EXPECT_EQ(order, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(a.active(), 0u);
}

// ----------------------------------------------------------------- metrics

TEST(FrameCaptureTest, CountsEncodedFrames) {
  FrameCapture cap;
  cap.record(1, true, proto::MessageType::kInvoke, as_bytes("abc-secret-xyz"));
  EXPECT_EQ(cap.size(), 0u);  // disabled by default
  cap.enable(true);
  cap.record(1, true, proto::MessageType::kInvoke, as_bytes("abc-secret-xyz"));
  cap.record(1, false, proto::MessageType::kGetReq, as_bytes("nothing"));
  EXPECT_EQ(cap.size(), 2u);
  EXPECT_EQ(cap.count_containing(as_bytes("secret")), 1u);
  EXPECT_EQ(cap.count_containing(as_bytes("absent")), 0u);
  cap.clear();
  EXPECT_EQ(cap.size(), 0u);
}

TEST(MetricsTest, JsonHasCounters) {
  Metrics m;
  m.invocations = 3;
  m.raise_peak(m.peak_active, 5);
  m.raise_peak(m.peak_active, 2);
  auto j = nlohmann::json::parse(m.to_json());
  EXPECT_EQ(j["invocations"], 3);
  EXPECT_EQ(j["peak_active"], 5);
}

}  // namespace
}  // namespace nexus::backend
