// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Runs every primary criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is non-zero when any
// criterion fails.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "nexus/backend/backend.hpp"
#include "nexus/common/clock.hpp"
#include "nexus/common/error.hpp"
#include "nexus/common/fnv.hpp"
#include "nexus/frontend/handler.hpp"
#include "nexus/harness/cluster.hpp"
#include "nexus/harness/replay.hpp"
#include "nexus/harness/report.hpp"
#include "nexus/harness/trace.hpp"
#include "nexus/proto/envelope.hpp"
#include "nexus/proto/frame.hpp"
#include "nexus/proto/messages.hpp"
#include "nexus/shmem/region.hpp"
#include "nexus/shmem/ring.hpp"

namespace nexus::acceptance {
namespace {

using harness::Cluster;
using harness::ClusterOptions;
using harness::SizedRef;
using harness::Trace;
using harness::TraceEvent;
using sandbox::Mode;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Collects individual conditions; the criterion passes iff all hold.
class Verdict {
 public:
  void check(bool ok, std::string what) {
    if (!ok) failed_.push_back(what);
    notes_.push_back(std::move(what));
  }
  void note(std::string what) { notes_.push_back(std::move(what)); }
  Outcome outcome() const {
    std::string d;
    for (auto& n : (failed_.empty() ? notes_ : failed_)) d += (d.empty() ? "" : "; ") + n;
    return {failed_.empty(), failed_.empty() ? d : "violated: " + d};
  }

 private:
  std::vector<std::string> notes_;
  std::vector<std::string> failed_;
};

double ms(std::uint64_t us) { return static_cast<double>(us) / 1000.0; }

backend::BackendConfig base_config(Mode mode) {
  backend::BackendConfig c;
  c.mode = mode;
  c.sandbox_binary = NEXUS_SANDBOX_BIN;
  c.default_restore = {5'000, 0, 0, 0.31};
  return c;
}

void register_functions(backend::BackendConfig& cfg, const Trace& trace) {
  for (auto& ev : trace) {
    if (cfg.find(ev.function)) continue;
    backend::FunctionConfig fn;
    fn.name = ev.function;
    fn.credentials_token = "tok-" + ev.function + "-7f3a9c";
    fn.restore = cfg.default_restore;
    cfg.functions.push_back(fn);
  }
}

proto::InvocationEnvelope envelope_for(const TraceEvent& ev) {
  auto env = harness::promote_hints(ev);
  env.invocation_id = Id128::random();
  env.idempotency_key = Id128::random();
  return env;
}

// ------------------------------------------------------------ 1. codec/ring

std::string random_string(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  std::string s(lo + rng() % (hi - lo + 1), ' ');
  for (auto& c : s) c = static_cast<char>(1 + rng() % 255);  // anything but NUL
  return s;
}

Bytes random_bytes(std::mt19937_64& rng, std::size_t max) {
  Bytes b(rng() % (max + 1));
  for (auto& x : b) x = static_cast<std::byte>(rng());
  return b;
}

Id128 random_id(std::mt19937_64& rng) {
  Id128 id;
  for (auto& b : id.bytes) b = static_cast<std::uint8_t>(rng());
  return id;
}

proto::ObjectRef random_ref(std::mt19937_64& rng) {
  return {random_string(rng, 1, 63), random_string(rng, 1, 200)};
}

// Encodes a random message as a frame and checks the decoded frame and body
// equal the original.
bool codec_roundtrip_one(std::mt19937_64& rng, Bytes& stream, std::vector<proto::Frame>& sent) {
  using proto::MessageType;
  auto pick = rng() % 10;
  MessageType type{};
  Bytes body;
  std::function<bool(ByteSpan)> same;
  switch (pick) {
    case 0: {
      proto::InvokeMsg m{random_id(rng), random_id(rng), random_string(rng, 1, 40), random_bytes(rng, 4096)};
      type = MessageType::kInvoke, body = m.encode();
      same = [m](ByteSpan b) { return proto::InvokeMsg::decode(b) == m; };
      break;
    }
    case 1: {
      proto::GetReq m{rng(), random_ref(rng)};
      type = MessageType::kGetReq, body = m.encode();
      same = [m](ByteSpan b) { return proto::GetReq::decode(b) == m; };
      break;
    }
    case 2: {
      proto::GetResp m{rng(), static_cast<proto::Status>(rng() % 3), static_cast<proto::TransferMode>(rng() % 2),
                       rng(), rng()};
      type = MessageType::kGetResp, body = m.encode();
      same = [m](ByteSpan b) { return proto::GetResp::decode(b) == m; };
      break;
    }
    case 3: {
      proto::PutReq m{rng(), static_cast<proto::PutPhase>(rng() % 2), static_cast<std::uint8_t>(rng() % 2),
                      random_ref(rng), rng(), rng()};
      type = MessageType::kPutReq, body = m.encode();
      same = [m](ByteSpan b) { return proto::PutReq::decode(b) == m; };
      break;
    }
    case 4: {
      proto::PutAck m{rng(), static_cast<proto::PutStatus>(rng() % 5), rng(), rng(), rng(),
                      random_string(rng, 0, 80)};
      type = MessageType::kPutAck, body = m.encode();
      same = [m](ByteSpan b) { return proto::PutAck::decode(b) == m; };
      break;
    }
    case 5: {
      proto::FnResponse m{random_id(rng), static_cast<proto::Status>(rng() % 3), random_bytes(rng, 4096),
                          random_string(rng, 0, 80)};
      type = MessageType::kFnResponse, body = m.encode();
      same = [m](ByteSpan b) { return proto::FnResponse::decode(b) == m; };
      break;
    }
    case 6: {
      proto::StreamOpen m{rng(), random_ref(rng), rng(), static_cast<std::uint8_t>(rng() % 2)};
      type = MessageType::kStreamOpen, body = m.encode();
      same = [m](ByteSpan b) { return proto::StreamOpen::decode(b) == m; };
      break;
    }
    case 7: {
      proto::StreamClose m{rng(), static_cast<proto::Status>(rng() % 3), rng(), rng(), random_string(rng, 0, 80)};
      type = MessageType::kStreamClose, body = m.encode();
      same = [m](ByteSpan b) { return proto::StreamClose::decode(b) == m; };
      break;
    }
    case 8: {
      proto::ErrorMsg m{static_cast<std::uint8_t>(rng()), random_string(rng, 0, 120)};
      type = MessageType::kError, body = m.encode();
      same = [m](ByteSpan b) { return proto::ErrorMsg::decode(b) == m; };
      break;
    }
    default: {
      proto::InvocationEnvelope m;
      m.invocation_id = random_id(rng);
      m.idempotency_key = random_id(rng);
      m.function = "fn-" + std::to_string(rng() % 1000);
      for (auto n = rng() % 4; n > 0; --n) {
        proto::ObjectRef r{"bucket-" + std::to_string(rng() % 50), "key/" + std::to_string(rng())};
        std::optional<std::uint64_t> size;
        if (rng() % 2) size = rng() % (proto::kDefaultMaxObjectBytes + 1);
        m.input_hints.push_back({r, size});
      }
      for (auto n = rng() % 3; n > 0; --n) m.output_hints.push_back({"out", "k" + std::to_string(rng())});
      m.event_body = random_bytes(rng, 2048);
      type = MessageType::kIngressInvoke;
      auto text = proto::serialize_envelope(m);
      body = Bytes(as_bytes(text).begin(), as_bytes(text).end());
      same = [m](ByteSpan b) { return proto::parse_envelope(b) == m; };
      break;
    }
  }
  auto frame = proto::encode_frame(type, body);
  proto::MemorySource src(frame);
  auto back = proto::decode_frame(src);
  if (back.type != type || back.body != body || src.consumed() != frame.size()) return false;
  if (!same(back.body)) return false;
  stream.insert(stream.end(), frame.begin(), frame.end());
  sent.push_back({type, std::move(body)});
  return true;
}

struct RingArea {
  explicit RingArea(std::uint64_t capacity)
      : mem(static_cast<std::byte*>(std::aligned_alloc(64, 128 + capacity))) {
    shmem::RingView::initialize(mem, capacity);
  }
  ~RingArea() { std::free(mem); }
  std::byte* mem;
};

// Random single-threaded schedule of producer and consumer steps against a
// deque oracle.
bool ring_schedule(std::mt19937_64& rng, std::uint64_t& max_fill_seen, std::string& why) {
  const std::uint64_t cap = 64ull << (rng() % 7);
  RingArea area(cap);
  shmem::RingView ring(area.mem);
  std::deque<std::byte> oracle;
  for (int step = 0; step < 400; ++step) {
    if (rng() % 2) {
      auto data = random_bytes(rng, cap + cap / 2);
      const auto free = cap - oracle.size();
      const auto n = ring.write(data);
      if (n != std::min<std::uint64_t>(data.size(), free)) {
        why = fmt::format("write accepted {} of {} with {} free", n, data.size(), free);
        return false;
      }
      oracle.insert(oracle.end(), data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
      Bytes out(rng() % (cap + cap / 2 + 1));
      const auto n = ring.read(out);
      if (n != std::min<std::uint64_t>(out.size(), oracle.size())) {
        why = "read size differs from oracle";
        return false;
      }
      for (std::uint64_t i = 0; i < n; ++i) {
        if (out[i] != oracle.front()) {
          why = "read bytes differ from oracle";
          return false;
        }
        oracle.pop_front();
      }
    }
    const auto fill = ring.tail() - ring.head();
    max_fill_seen = std::max(max_fill_seen, fill);
    if (fill > cap || fill != oracle.size()) {
      why = fmt::format("fill {} capacity {} oracle {}", fill, cap, oracle.size());
      return false;
    }
  }
  return true;
}

// Producer and consumer on separate threads with an observer sampling the
// counters; the consumed stream must equal the produced one.
bool ring_threaded(std::mt19937_64& rng, std::string& why) {
  const std::uint64_t cap = 256ull << (rng() % 4);
  RingArea area(cap);
  shmem::RingView prod(area.mem), cons(area.mem), obs(area.mem);
  auto data = random_bytes(rng, 64 * 1024);
  const auto seed = rng();
  Bytes got;
  got.reserve(data.size());
  std::atomic<bool> done{false}, bound_ok{true};
  std::thread producer([&] {
    std::mt19937_64 r(seed);
    std::size_t off = 0;
    while (off < data.size()) {
      auto want = std::min<std::size_t>(1 + r() % 700, data.size() - off);
      off += prod.write(ByteSpan(data).subspan(off, want));
      if (r() % 4 == 0) std::this_thread::yield();
    }
  });
  std::thread observer([&] {
    while (!done.load()) {
      // Head first: tail read later can only be larger, so a violation seen
      // here is real.
      auto h = obs.head();
      auto t = obs.tail();
      if (t < h || t - h > cap) bound_ok = false;
      std::this_thread::yield();
    }
  });
  std::mt19937_64 r(seed ^ 0x5bd1e995);
  Bytes buf(1024);
  while (got.size() < data.size()) {
    auto n = cons.read(MutableByteSpan(buf).first(1 + r() % buf.size()));
    got.insert(got.end(), buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n));
    if (n == 0) std::this_thread::yield();
  }
  producer.join();
  done = true;
  observer.join();
  if (got != data) {
    why = "threaded stream differs from producer input";
    return false;
  }
  if (!bound_ok) {
    why = "observer saw tail - head > capacity";
    return false;
  }
  return true;
}

Outcome codec_and_ring() {
  Verdict v;
  const auto t0 = now_us();
  std::mt19937_64 rng(20261017);

  constexpr int kMessages = 10'000;
  int ok = 0;
  Bytes stream;
  std::vector<proto::Frame> sent;
  for (int i = 0; i < kMessages; ++i) ok += codec_roundtrip_one(rng, stream, sent) ? 1 : 0;
  // The same frames decoded back to back from one concatenated stream.
  proto::MemorySource src(stream);
  std::size_t seq_ok = 0;
  for (auto& f : sent) seq_ok += (proto::decode_frame(src) == f) ? 1 : 0;
  v.check(ok == kMessages, fmt::format("{}/{} randomized messages round-trip", ok, kMessages));
  v.check(seq_ok == sent.size() && src.consumed() == stream.size(),
          fmt::format("{}/{} decoded from one stream", seq_ok, sent.size()));

  constexpr int kSchedules = 1'000;
  constexpr int kThreaded = 100;
  int ring_ok = 0;
  std::uint64_t max_fill = 0;
  std::string why;
  for (int i = 0; i < kSchedules; ++i) {
    std::string w;
    if (ring_schedule(rng, max_fill, w)) ring_ok++;
    else if (why.empty()) why = w;
  }
  int threaded_ok = 0;
  for (int i = 0; i < kThreaded; ++i) {
    std::string w;
    if (ring_threaded(rng, w)) threaded_ok++;
    else if (why.empty()) why = w;
  }
  v.check(ring_ok == kSchedules, fmt::format("{}/{} ring interleavings match the queue oracle{}", ring_ok,
                                             kSchedules, why.empty() ? "" : " (" + why + ")"));
  v.check(threaded_ok == kThreaded, fmt::format("{}/{} threaded SPSC runs in order, tail-head <= capacity",
                                                threaded_ok, kThreaded));
  const auto secs = (now_us() - t0) / 1e6;
  v.check(secs < 60, fmt::format("runtime {:.1f} s < 60 s", secs));
  return v.outcome();
}

// -------------------------------------------------------- 2. zero-copy run

Outcome zero_copy_integrity() {
  Verdict v;
  const auto t0 = now_us();
  harness::GenOptions g;
  g.functions = 4;
  g.count = 1000;
  g.rate_per_s = 60;
  g.service_us = 10'000;
  g.io_ratio = 0.5;
  g.seed = 11;
  auto trace = harness::generate_trace(g);

  ClusterOptions o;
  o.backend = base_config(Mode::kOffloadedAsync);
  o.backend.verify_checksums = true;
  register_functions(o.backend, trace);
  Cluster cluster(o);
  auto& m = cluster.backend()->metrics();
  const auto slot_bytes0 = m.slot_bytes_written.load();
  auto rep = harness::replay(cluster, trace);
  const auto slot_bytes = m.slot_bytes_written.load() - slot_bytes0;

  std::size_t ok = 0, outputs = 0, hinted = 0, unhinted = 0;
  std::uint64_t expect_slot_bytes = 0;
  for (auto& r : rep.invocations) {
    ok += r.ok ? 1 : 0;
    const auto& ev = trace[r.index];
    (ev.hinted ? hinted : unhinted)++;
    if (ev.output) outputs++;
    if (r.zero_copy_inputs > 0) {
      for (auto& in : ev.inputs) expect_slot_bytes += in.size;
    }
  }
  const auto& c = rep.counters;
  v.note(fmt::format("{} hinted, {} unhinted, {} outputs", hinted, unhinted, outputs));
  v.check(rep.invocations.size() == 1000 && ok == 1000, fmt::format("{}/1000 invocations ok", ok));
  v.check(c.checksum_mismatches == 0, fmt::format("checksum mismatches {}", c.checksum_mismatches));
  v.check(c.slot_get_copies == 0, fmt::format("SLOT-path payload copies {}", c.slot_get_copies));
  v.check(c.puts == outputs && c.put_copies == c.puts,
          fmt::format("PUT copies {} for {} puts", c.put_copies, c.puts));
  v.check(slot_bytes == expect_slot_bytes && expect_slot_bytes > 0,
          fmt::format("slot bytes written {} = SLOT payload bytes {}", slot_bytes, expect_slot_bytes));
  v.check(c.hint_mismatches == 0, fmt::format("hint mismatches {}", c.hint_mismatches));
  const auto secs = (now_us() - t0) / 1e6;
  v.check(secs < 300, fmt::format("runtime {:.1f} s < 300 s", secs));
  return v.outcome();
}

// ---------------------------------------------------------- 3. prefetch

proto::IngressResponse one_cold_invocation(Mode mode, const TraceEvent& ev, std::uint64_t store_latency_us) {
  ClusterOptions o;
  o.backend = base_config(mode);
  o.backend.default_restore = {200'000, 0, 0, 0.31};
  register_functions(o.backend, {ev});
  o.store.one_way_latency_us = store_latency_us;
  Cluster cluster(o);
  cluster.seed(harness::input_objects({ev}));
  return cluster.client().invoke(envelope_for(ev)).response;
}

Outcome prefetch_overlap() {
  Verdict v;
  TraceEvent ev{0, "fn-prefetch", {{{"inputs", "prefetch-object"}, 1024}}, 50'000, std::nullopt, true};
  auto async = one_cold_invocation(Mode::kOffloadedAsync, ev, 150'000);
  auto coupled = one_cold_invocation(Mode::kCoupled, ev, 150'000);
  const auto& b = async.breakdown_us;
  v.check(async.ok && coupled.ok, fmt::format("responses ok ({}{})", async.error, coupled.error));
  v.check(async.cold && coupled.cold, "both invocations cold");
  v.check(b.prefetch >= 150'000, fmt::format("hinted fetch {:.1f} ms >= 150 ms", ms(b.prefetch)));
  v.check(async.breakdown_us.total <= 260'000,
          fmt::format("offloaded-async critical path {:.1f} ms <= 260 ms", ms(async.breakdown_us.total)));
  v.check(coupled.breakdown_us.total >= 400'000,
          fmt::format("coupled critical path {:.1f} ms >= 400 ms", ms(coupled.breakdown_us.total)));
  // Both restore and prefetch start at admission.
  const auto overlap = std::min(b.restore, b.prefetch);
  const auto need = 0.9 * static_cast<double>(std::min<std::uint64_t>(200'000, 150'000));
  v.check(static_cast<double>(overlap) >= need,
          fmt::format("overlap {:.1f} ms >= {:.1f} ms", ms(overlap), need / 1000));
  return v.outcome();
}

// ------------------------------------------------------- 4. early release

Outcome early_release() {
  Verdict v;
  ClusterOptions o;
  o.backend = base_config(Mode::kOffloadedAsync);
  TraceEvent warm{0, "fn-release", {}, 1'000, std::nullopt, true};
  register_functions(o.backend, {warm});
  Cluster cluster(o);
  auto client = cluster.client();
  auto w = client.invoke(envelope_for(warm)).response;
  v.check(w.ok, "warm-up ok");

  cluster.store().set_latency_us(500'000);
  TraceEvent first{0, "fn-release", {}, 1'000, SizedRef{{"outputs", "release-1"}, 4096}, true};
  TraceEvent second{0, "fn-release", {}, 1'000, std::nullopt, true};
  proto::IngressResponse r1, r2;
  std::thread t1([&] { r1 = client.invoke(envelope_for(first)).response; });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  std::thread t2([&] { r2 = client.invoke(envelope_for(second)).response; });
  t1.join();
  t2.join();
  v.check(r1.ok && r2.ok, fmt::format("both ok ({}{})", r1.error, r2.error));
  v.check(r1.sandbox_id != 0 && r1.sandbox_id == r2.sandbox_id, "second invocation ran in the same sandbox");
  const auto& m1 = r1.timestamps_us;
  const auto lead = static_cast<std::int64_t>(m1.released) - static_cast<std::int64_t>(r2.timestamps_us.invoke_sent);
  v.check(lead >= 400'000, fmt::format("second INVOKE {:.1f} ms before first release", lead / 1000.0));
  std::uint64_t store_ack = 0;
  for (auto& rec : cluster.store().request_log()) {
    if (rec.op == store::StoreOp::kPut && rec.ref == first.output->ref) store_ack = rec.responded_us;
  }
  v.check(store_ack != 0 && m1.released >= store_ack && m1.released >= m1.last_write_ack,
          fmt::format("release {:.1f} ms after store ack", (static_cast<double>(m1.released) - store_ack) / 1000));

  // Every attempt of the next write fails.
  cluster.store().fail_next_puts(o.backend.writeback_retries + 1);
  TraceEvent failing{0, "fn-release", {}, 1'000, SizedRef{{"outputs", "release-fail"}, 4096}, true};
  auto r3 = client.invoke(envelope_for(failing)).response;
  v.check(r3.timestamps_us.fn_response != 0, "handler returned");
  v.check(!r3.ok && r3.payload.empty(), fmt::format("write failure surfaces as error: \"{}\"", r3.error));
  return v.outcome();
}

// ------------------------------------------------------------ 5. streaming

Outcome streaming_bound() {
  Verdict v;
  constexpr std::uint64_t kObject = 64ull << 20;
  constexpr std::uint64_t kRing = 4ull << 20;
  ClusterOptions o;
  o.backend = base_config(Mode::kOffloadedAsync);
  o.backend.ring_capacity_bytes = kRing;
  TraceEvent ev{0, "fn-stream", {{{"inputs", "big-object"}, kObject}}, 0, std::nullopt, false};
  register_functions(o.backend, {ev});
  Cluster cluster(o);
  cluster.seed(harness::input_objects({ev}));
  const auto stored = cluster.store().objects().get(ev.inputs[0].ref);
  const auto oracle = fnv1a64(stored->data);
  auto& m = cluster.backend()->metrics();
  const auto ring_gets0 = m.ring_gets.load();
  const auto slot0 = m.slot_bytes_written.load();
  auto r = cluster.client().invoke(envelope_for(ev)).response;
  v.check(r.ok, "invocation ok " + r.error);
  if (r.ok) {
    auto rep = frontend::parse_report(r.payload);
    v.check(rep.inputs.size() == 1 && rep.inputs[0].size == kObject && rep.inputs[0].checksum == oracle,
            "64 MiB content checksum matches the store");
  }
  v.check(m.ring_gets.load() - ring_gets0 == 1, "served through the ring");
  const auto slot_bytes = m.slot_bytes_written.load() - slot0;
  const auto header = shmem::kHeaderBytes + shmem::kRingControlBytes;
  const auto peak = header + slot_bytes + m.peak_ring_fill.load();
  v.check(peak <= kRing + header,
          fmt::format("peak region usage {} <= ring {} + header {}", peak, kRing, header));
  return v.outcome();
}

// ------------------------------------------------------- 6. rate limiting

Outcome rate_limiting() {
  Verdict v;
  constexpr std::uint64_t kRate = 600'000'000;
  {
    backend::RateLimiter rl;
    rl.configure("f", kRate, {"a", "b"});
    const auto window_end = now_us() + 2'500'000;
    auto pump = [&](const std::string& client) {
      while (now_us() < window_end) rl.acquire("f", client, 256 * 1024);
    };
    std::thread ta(pump, "a");
    pump("b");
    ta.join();
    for (auto name : {"a", "b"}) {
      auto s = rl.stats("f", name);
      const auto window = s.last_us - s.first_us;
      const double mbps = static_cast<double>(s.bytes) * 8 / static_cast<double>(window);
      v.check(window >= 2'000'000 && mbps <= 300 * 1.05,
              fmt::format("client {} {:.1f} Mbps over {:.2f} s", name, mbps, window / 1e6));
    }
  }
  {
    // A fresh single-client bucket holds no tokens, so 75 MB drains at the
    // full rate.
    backend::RateLimiter rl;
    rl.configure("f", kRate, {"s3"});
    const auto t0 = now_us();
    for (std::uint64_t left = 75'000'000; left > 0;) {
      const auto n = std::min<std::uint64_t>(left, 1 << 20);
      rl.acquire("f", "s3", n);
      left -= n;
    }
    const double secs = (now_us() - t0) / 1e6;
    v.check(secs >= 0.9 && secs <= 1.1, fmt::format("75 MB single-client transfer {:.3f} s (1.0 s +/- 10%)", secs));
  }
  {
    // The same transfer as a hinted prefetch. Idle time between backend
    // start and the request refills the bucket, so this is reported only.
    ClusterOptions o;
    o.backend = base_config(Mode::kOffloadedAsync);
    o.backend.region_cap_bytes = 128ull << 20;
    o.store.bandwidth_bps = 100'000'000'000;
    TraceEvent ev{0, "fn-rate", {{{"inputs", "seventy-five-mb"}, 75'000'000}}, 0, std::nullopt, true};
    register_functions(o.backend, {ev});
    o.backend.functions[0].rate_limit_bps = kRate;
    o.backend.functions[0].clients = {"s3"};
    Cluster cluster(o);
    cluster.seed(harness::input_objects({ev}));
    auto r = cluster.client().invoke(envelope_for(ev)).response;
    v.check(r.ok, "75 MB prefetch ok " + r.error);
    v.note(fmt::format("75 MB prefetch through the backend {:.3f} s", r.breakdown_us.prefetch / 1e6));
  }
  return v.outcome();
}

// -------------------------------------------------------------- 7. faults

Outcome crash_recovery() {
  Verdict v;
  harness::FaultCampaignOptions o;
  o.runs = 20;
  o.backend = base_config(Mode::kOffloadedAsync);
  o.backend_binary = NEXUS_BACKEND_BIN;
  auto rep = harness::run_fault_campaign(o);
  std::set<backend::FaultPoint> points;
  std::uint32_t restarts = 0;
  for (auto& r : rep.runs) {
    for (auto& f : r.plan) points.insert(f.point);
    restarts += r.restarts;
  }
  using R = harness::FaultRunResult;
  const auto events = rep.total(&R::events);
  v.check(rep.runs.size() == 20, fmt::format("{} runs", rep.runs.size()));
  v.check(points.size() == 2, fmt::format("both kill points exercised ({} restarts)", restarts));
  v.check(rep.total(&R::lost) == 0 && rep.total(&R::doubled) == 0,
          fmt::format("lost {} doubled {} of {} invocations", rep.total(&R::lost), rep.total(&R::doubled), events));
  v.check(rep.total(&R::ok) + rep.total(&R::errors) == events,
          fmt::format("{} ok + {} errors = {} outcomes", rep.total(&R::ok), rep.total(&R::errors), events));
  v.check(rep.total(&R::missing_objects) == 0,
          fmt::format("acknowledged objects missing {}", rep.total(&R::missing_objects)));
  v.note(fmt::format("duplicate versions {} (permitted), ingress retries {}", rep.total(&R::duplicate_writes),
                     rep.total(&R::retries)));
  return v.outcome();
}

// ------------------------------------------------------- 8. mode ordering

double mean_io(Mode mode, const Trace& trace) {
  ClusterOptions o;
  o.backend = base_config(mode);
  o.store.one_way_latency_us = 1'000;
  register_functions(o.backend, trace);
  Cluster cluster(o);
  harness::prewarm(cluster, trace, 1);
  auto rep = harness::replay(cluster, trace);
  if (rep.counters.errors != 0) throw Error(Errc::kHandlerError, "errors during ordering replay");
  return rep.mean_io_us;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome mode_ordering() {
  Verdict v;
  const Mode modes[] = {Mode::kCoupled, Mode::kOffloaded, Mode::kOffloadedAsync};
  for (double io : {0.5, 0.9}) {
    harness::GenOptions g;
    g.functions = 3;
    g.rate_per_s = 20;
    g.duration_ms = 3000;
    g.io_ratio = io;
    g.seed = 3;
    auto trace = harness::generate_trace(g);
    double t[3];
    for (int i = 0; i < 3; ++i) t[i] = mean_io(modes[i], trace);
    const bool strict = io >= 0.9;
    const bool ordered = strict ? (t[0] > t[1] && t[1] > t[2]) : (t[0] >= t[1] && t[1] >= t[2]);
    v.check(ordered, fmt::format("io-ratio {} mean I/O {:.2f} {} {:.2f} {} {:.2f} ms", io, t[0] / 1000,
                                 strict ? ">" : ">=", t[1] / 1000, strict ? ">" : ">=", t[2] / 1000));
  }
  auto tmpl = harness::parse_sweep_template(read_file(NEXUS_SWEEP_TEMPLATE));
  tmpl.backend.sandbox_binary = NEXUS_SANDBOX_BIN;
  std::uint32_t d[3];
  for (int i = 0; i < 3; ++i) d[i] = harness::density_sweep(tmpl, modes[i], 5.0).density;
  v.check(d[0] <= d[1] && d[1] <= d[2], fmt::format("density {} <= {} <= {}", d[0], d[1], d[2]));
  return v.outcome();
}

// ---------------------------------------------------- 9. credential leaks

Outcome credential_confinement() {
  Verdict v;
  harness::GenOptions g;
  g.functions = 3;
  g.count = 60;
  g.rate_per_s = 40;
  g.output_fraction = 0.5;
  g.seed = 9;
  auto trace = harness::generate_trace(g);
  for (auto mode : {Mode::kCoupled, Mode::kOffloaded, Mode::kOffloadedAsync}) {
    ClusterOptions o;
    o.backend = base_config(mode);
    register_functions(o.backend, trace);
    Cluster cluster(o);
    auto& cap = cluster.backend()->capture();
    cap.enable(true);
    auto rep = harness::replay(cluster, trace);
    std::size_t hits = 0;
    for (auto& f : o.backend.functions) hits += cap.count_containing(as_bytes(f.credentials_token));
    v.check(rep.counters.errors == 0 && cap.size() > 0 && hits == 0,
            fmt::format("{}: {} frames captured, {} contain a token", sandbox::mode_name(mode), cap.size(), hits));
  }
  return v.outcome();
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {"codec-and-ring-properties", codec_and_ring},
    {"zero-copy-integrity", zero_copy_integrity},
    {"prefetch-overlap", prefetch_overlap},
    {"early-release-and-gating", early_release},
    {"streaming-fallback-bound", streaming_bound},
    {"rate-limiting", rate_limiting},
    {"crash-only-recovery", crash_recovery},
    {"mode-ordering", mode_ordering},
    {"credential-confinement", credential_confinement},
};

}  // namespace
}  // namespace nexus::acceptance

int main(int argc, char** argv) {
  using namespace nexus::acceptance;
  spdlog::set_level(spdlog::level::err);
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (auto& c : kCriteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto t0 = nexus::now_us();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = (nexus::now_us() - t0) / 1e6;
    std::printf("%s %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", c.name, secs, out.detail.c_str());
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
