#include <gtest/gtest.h>

#include <numeric>

#include "svsim/endpoints.hpp"
#include "svsim/simulation.hpp"
#include "test_support.hpp"

namespace svsim {
namespace {

constexpr TimeNs kMs = 1'000'000;

VideoAsset dash_asset() {
  VideoAsset a;
  a.name = "DASH";
  a.variant = AssetVariant::kSegmented;
  a.segment_duration_s = 10;
  a.segment_count = 8;
  a.representations = {{"low", 250'000, "crf40"}, {"mid", 750'000, "crf30"}, {"top", 2'000'000, "crf20"}};
  return a;
}

VideoAsset svc_asset() {
  VideoAsset a;
  a.name = "SHVC";
  a.variant = AssetVariant::kLayered;
  a.layers = {{"base", 250'000, "crf40"}, {"enh", 2'000'000, "crf20"}};
  return a;
}

std::vector<Packet> segment_packets(const Manifest& m, int seg, std::size_t rep) {
  const auto sizes = packetize(m.bytes(rep, seg), 1460);
  std::vector<Packet> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Packet p;
    p.kind = PacketKind::kData;
    p.size = kHeaderBytes + sizes[i];
    p.index = seg;
    p.unit = static_cast<std::int32_t>(rep);
    p.seq = static_cast<std::int32_t>(i);
    p.count = static_cast<std::int32_t>(sizes.size());
    out.push_back(p);
  }
  return out;
}

TEST(FrameBytes, RoundsUp) {
  EXPECT_EQ(frame_bytes(2'000'000, 15), 16'667);
  EXPECT_EQ(frame_bytes(240'000, 15), 2'000);
}

TEST(DashClient, ColdStartThenSelectsFromMeasuredThroughput) {
  const Manifest m = make_manifest(dash_asset());
  DashClient c({0.8, 0.9, kNsPerSecond});
  auto a = c.step(DashClient::Start{}, 0);
  ASSERT_EQ(a.send.size(), 1u);
  EXPECT_EQ(a.send[0].kind, PacketKind::kManifestRequest);
  EXPECT_TRUE(a.timer.has_value());

  a = c.step(DashClient::ManifestArrived{&m}, 10 * kMs);
  ASSERT_EQ(c.requests().size(), 1u);
  EXPECT_EQ(c.requests()[0].rep, 0u);
  EXPECT_EQ(c.requests()[0].segment, 0);

  // Deliver segment 0 so that bytes * 8 / elapsed = 1.8 Mbps.
  const auto pkts = segment_packets(m, 0, 0);
  const TimeNs done = 10 * kMs + static_cast<TimeNs>(std::llround(312'500 * 8 / 1.8e6 * 1e9));
  std::optional<DashClient::Completed> completed;
  for (std::size_t i = 0; i < pkts.size(); ++i) {
    const TimeNs t = i + 1 == pkts.size() ? done : 10 * kMs + static_cast<TimeNs>(i) * kMs;
    a = c.step(DashClient::Data{pkts[i]}, t);
    ASSERT_EQ(a.send.front().kind, PacketKind::kAck);
    if (a.completed) completed = a.completed;
  }
  ASSERT_TRUE(completed.has_value());
  EXPECT_EQ(completed->segment, 0);
  EXPECT_NEAR(c.estimator().estimate(), 1.8e6, 1.0);
  ASSERT_EQ(c.requests().size(), 2u);
  EXPECT_EQ(c.requests()[1].segment, 1);
  EXPECT_EQ(c.requests()[1].rep, 1u);  // 0.9 * 1.8 Mbps = 1.62 Mbps < 2 Mbps
}

TEST(DashClient, TimeoutRequestsMissingPackets) {
  const Manifest m = make_manifest(dash_asset());
  DashClient c({0.8, 0.9, kNsPerSecond});
  c.step(DashClient::Start{}, 0);
  c.step(DashClient::ManifestArrived{&m}, 0);
  const auto pkts = segment_packets(m, 0, 0);
  for (std::size_t i = 0; i < pkts.size(); ++i) {
    if (i == 3 || i == 7) continue;
    c.step(DashClient::Data{pkts[i]}, 100 * kMs);
  }
  // Timer fires before the progress deadline: re-armed, nothing sent.
  auto a = c.step(DashClient::Timer{}, 1000 * kMs);
  EXPECT_TRUE(a.send.empty());
  ASSERT_TRUE(a.timer.has_value());
  EXPECT_EQ(*a.timer, 1100 * kMs);
  a = c.step(DashClient::Timer{}, 1100 * kMs);
  ASSERT_EQ(a.send.size(), 1u);
  const Packet& req = a.send[0];
  EXPECT_EQ(req.kind, PacketKind::kSegmentRequest);
  EXPECT_TRUE(req.retransmission);
  ASSERT_TRUE(req.list);
  EXPECT_EQ(*req.list, (std::vector<std::uint32_t>{3, 7}));
  EXPECT_EQ(c.retransmission_requests(), 1u);
  // Filling the gaps completes the segment.
  c.step(DashClient::Data{pkts[3]}, 1200 * kMs);
  a = c.step(DashClient::Data{pkts[7]}, 1210 * kMs);
  ASSERT_TRUE(a.completed.has_value());
}

TEST(DashClient, RejectsSegmentBeyondManifest) {
  VideoAsset one = dash_asset();
  one.segment_count = 1;
  const Manifest m = make_manifest(one);
  DashClient c({0.8, 0.9, kNsPerSecond});
  c.step(DashClient::Start{}, 0);
  c.step(DashClient::ManifestArrived{&m}, 0);
  DashClient::Actions last;
  for (const auto& p : segment_packets(m, 0, 0)) last = c.step(DashClient::Data{p}, kMs);
  EXPECT_EQ(c.phase(), DashClient::Phase::kDone);
  EXPECT_EQ(c.requests().size(), 1u);
}

TEST(DashServer, WindowAcksAndRetransmissions) {
  const Manifest m = make_manifest(dash_asset());
  DashServer s(m, 1460, 8);
  Packet req;
  req.kind = PacketKind::kSegmentRequest;
  req.index = 0;
  req.unit = 0;
  auto out = s.on_packet(req);
  ASSERT_EQ(out.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)].seq, i);
  Packet ack;
  ack.kind = PacketKind::kAck;
  ack.index = 0;
  ack.unit = 0;
  ack.seq = 0;
  out = s.on_packet(ack);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].seq, 8);
  EXPECT_FALSE(out[0].retransmission);

  // Client reports 2 and 5 missing; everything else outstanding arrived.
  Packet re = req;
  re.retransmission = true;
  re.list = std::make_shared<std::vector<std::uint32_t>>(std::vector<std::uint32_t>{2, 5});
  out = s.on_packet(re);
  ASSERT_GE(out.size(), 2u);
  EXPECT_EQ(out[0].seq, 2);
  EXPECT_TRUE(out[0].retransmission);
  EXPECT_EQ(out[1].seq, 5);
  EXPECT_TRUE(out[1].retransmission);
  EXPECT_EQ(s.outstanding(), 8u);
}

TEST(SvcSender, PinnedLowEstimateSendsBaseOnly) {
  const VideoAsset a = svc_asset();
  SvcSender s(a, 0.8, 1460);
  s.step(SvcSender::Report{400'000}, 0);
  for (int f = 0; f < 30; ++f) {
    const auto out = s.step(SvcSender::Tick{f}, 0);
    for (const auto& p : out.send) ASSERT_EQ(p.unit, 0);
    ASSERT_FALSE(out.send.empty());
  }
  EXPECT_EQ(s.layer_count(), 1);
}

TEST(SvcSender, PinnedHighEstimateSendsBothLayers) {
  const VideoAsset a = svc_asset();
  SvcSender s(a, 0.8, 1460);
  auto log = s.step(SvcSender::Report{2'500'000}, 0).log;
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].event, "layer_change");
  for (int f = 0; f < 30; ++f) {
    const auto out = s.step(SvcSender::Tick{f}, 0);
    std::set<int> layers;
    std::int64_t bytes = 0;
    for (const auto& p : out.send) {
      layers.insert(p.unit);
      bytes += p.size - kHeaderBytes;
    }
    ASSERT_EQ(layers, (std::set<int>{0, 1}));
    ASSERT_EQ(bytes, frame_bytes(250'000, 15) + frame_bytes(1'750'000, 15));
  }
  EXPECT_EQ(s.layers_sent(), std::vector<int>(30, 2));
}

TEST(DispersionMeter, PacketPairRate) {
  DispersionMeter m;
  EXPECT_EQ(m.take_sample(), std::nullopt);
  Packet p;
  p.kind = PacketKind::kData;
  p.size = 1500;
  p.index = 4;
  m.on_packet(p, 0);
  m.on_packet(p, 10 * kMs);  // 12000 bits in 10 ms
  m.on_packet(p, 20 * kMs);
  p.index = 5;
  m.on_packet(p, 500 * kMs);  // new frame: no pair
  const auto s = m.take_sample();
  ASSERT_TRUE(s.has_value());
  EXPECT_DOUBLE_EQ(*s, 1'200'000);
  EXPECT_EQ(m.take_sample(), std::nullopt);
}

TEST(CbrSender, TotalBytesWithinOnePacket) {
  VideoAsset a;
  a.variant = AssetVariant::kSingleRate;
  a.bitrate_bps = 2'000'000;
  a.quality = "crf20";
  CbrSender s(a, 1460);
  std::int64_t bytes = 0;
  for (int f = 0; f < a.frame_count; ++f) {
    for (const auto& p : s.frame_packets(f)) bytes += p.size - kHeaderBytes;
  }
  const double nominal = a.bitrate_bps * (a.frame_count / a.frame_rate) / 8;
  EXPECT_LE(std::abs(static_cast<double>(bytes) - nominal), 1460.0);
}

TEST(FrameAssembler, RanksBecomeReadyInLayerOrder) {
  FrameAssembler fa(4, 2);
  auto make = [](int frame, int layer, int seq, int count) {
    Packet p;
    p.kind = PacketKind::kData;
    p.index = frame;
    p.unit = layer;
    p.seq = seq;
    p.count = count;
    return p;
  };
  // Enhancement completes before the base: nothing until the base is whole.
  EXPECT_TRUE(fa.on_packet(make(1, 1, 0, 1)).empty());
  EXPECT_TRUE(fa.on_packet(make(1, 0, 0, 2)).empty());
  EXPECT_TRUE(fa.on_packet(make(1, 0, 0, 2)).empty());  // duplicate
  const auto ready = fa.on_packet(make(1, 0, 1, 2));
  ASSERT_EQ(ready.size(), 2u);
  EXPECT_EQ(ready[0].rank, 0);
  EXPECT_EQ(ready[1].rank, 1);
  EXPECT_TRUE(fa.on_packet(make(9, 0, 0, 1)).empty());  // out of range
}

TEST(DashEndToEnd, TinyQueueForcesRetransmissionsYetCompletes) {
  auto cfg = test::stepped_scenario();
  for (auto& l : cfg.topology.links) {
    if (l.id == 101) l.queue_capacity = 3;
  }
  cfg.transport.window_packets = 12;
  const auto& dash = *cfg.find_asset("DASH");
  const auto r = simulate(cfg, dash, 0, 1);
  int rerequests = 0;
  bool done = false;
  for (const auto& e : r.events) {
    rerequests += e.event == "segment_rerequest";
    done = done || e.event == "download_done";
  }
  EXPECT_GT(rerequests, 0);
  EXPECT_GT(r.metrics.lost, 0);
  EXPECT_TRUE(done);
  EXPECT_EQ(r.dash_requests.size(), 8u);
  for (const auto& [flow, acc] : r.accounting) EXPECT_TRUE(acc.conserved()) << flow;
}

}  // namespace
}  // namespace svsim
