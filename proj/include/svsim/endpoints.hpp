#pragma once

// Application endpoints for the three delivery methods. Each endpoint is a
// state machine: step(input, now) updates the state and returns the
// actions (packets to send, timers to arm, log lines) for the caller to
// carry out. None of them touch the kernel or the network directly.

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "svsim/core_model.hpp"
#include "svsim/network.hpp"
#include "svsim/streaming.hpp"

namespace svsim {

struct AppLog {
  TimeNs time = 0;
  std::string event;
  std::string detail;
};

// Payload sizes of control messages (header excluded).
inline constexpr int kManifestRequestPayload = 100;
inline constexpr int kSegmentRequestPayload = 16;  // plus a bitmap of missing packets
inline constexpr int kAckPayload = 12;
inline constexpr int kReportPayload = 24;

// Frame payload for one layer (or the single-rate stream), in bytes:
// ceil(rate / frame_rate / 8).
std::int64_t frame_bytes(double rate_bps, double frame_rate);

// ---------------------------------------------------------------- DASH

struct DashClientOptions {
  double ewma_alpha = 0.8;
  double safety_factor = 0.9;
  TimeNs rto = kNsPerSecond;
};

class DashClient {
 public:
  enum class Phase { kIdle, kFetchManifest, kDownloading, kDone };

  struct Start {};
  struct ManifestArrived {
    const Manifest* manifest;
  };
  struct Data {
    Packet packet;
  };
  struct Timer {};
  using Input = std::variant<Start, ManifestArrived, Data, Timer>;

  struct Completed {
    int segment;
    std::size_t rep;
  };

  struct Actions {
    std::vector<Packet> send;
    std::optional<TimeNs> timer;
    std::vector<AppLog> log;
    std::optional<Completed> completed;
  };

  struct RequestRecord {
    TimeNs time;
    int segment;
    std::size_t rep;
    double bitrate_bps;
  };

  explicit DashClient(DashClientOptions options);

  Actions step(const Input& input, TimeNs now);

  Phase phase() const { return phase_; }
  const ThroughputEstimator& estimator() const { return estimator_; }
  const std::vector<RequestRecord>& requests() const { return requests_; }
  // Per completed segment: the representation it was fetched at.
  const std::vector<std::size_t>& completed_reps() const { return completed_reps_; }
  std::uint64_t retransmission_requests() const { return rerequests_; }

 private:
  void request_segment(int segment, TimeNs now, Actions& out);
  void on_data(const Packet& p, TimeNs now, Actions& out);
  void on_timer(TimeNs now, Actions& out);
  void arm(TimeNs at, Actions& out);

  DashClientOptions opt_;
  ThroughputEstimator estimator_;
  Phase phase_ = Phase::kIdle;
  const Manifest* manifest_ = nullptr;

  int segment_ = -1;
  std::size_t rep_ = 0;
  std::optional<std::size_t> last_rep_;
  TimeNs request_time_ = 0;
  std::vector<bool> received_;
  std::size_t received_count_ = 0;
  std::int64_t received_bytes_ = 0;

  TimeNs last_progress_ = 0;
  bool timer_armed_ = false;
  std::vector<RequestRecord> requests_;
  std::vector<std::size_t> completed_reps_;
  std::uint64_t rerequests_ = 0;
};

// Serves the manifest and segments. Segment packets go out under a fixed
// window of unacknowledged packets; re-requests name the missing packets,
// which are resent tagged as retransmissions.
class DashServer {
 public:
  DashServer(const Manifest& manifest, int mtu_payload, int window_packets);

  std::vector<Packet> on_packet(const Packet& in);

  int current_segment() const { return segment_; }
  std::size_t outstanding() const { return outstanding_.size(); }

 private:
  struct Pending {
    int seq;
    bool retransmission;
  };

  void start(int segment, std::size_t rep);
  void fill(std::vector<Packet>& out);

  const Manifest& manifest_;
  int mtu_payload_;
  std::size_t window_;
  int segment_ = -1;
  std::size_t rep_ = 0;
  std::vector<int> sizes_;
  std::deque<Pending> pending_;
  std::set<int> queued_;
  std::set<int> outstanding_;
};

// ---------------------------------------------------------------- SVC

class SvcSender {
 public:
  struct Tick {
    int frame;
  };
  struct Report {
    double throughput_bps;
  };
  using Input = std::variant<Tick, Report>;

  struct Actions {
    std::vector<Packet> send;
    std::vector<AppLog> log;
  };

  SvcSender(const VideoAsset& asset, double ewma_alpha, int mtu_payload);

  Actions step(const Input& input, TimeNs now);

  int layer_count() const { return layers_; }
  const ThroughputEstimator& estimator() const { return estimator_; }
  // Number of layers emitted for each frame sent so far.
  const std::vector<int>& layers_sent() const { return layers_sent_; }

 private:
  const VideoAsset& asset_;
  std::vector<double> cumulative_;
  std::vector<std::vector<int>> layer_packets_;  // payload sizes per layer
  ThroughputEstimator estimator_;
  int layers_ = 1;
  std::vector<int> layers_sent_;
};

// Measures delivered throughput from the spacing of back-to-back packets
// of the same frame: bits of every packet after the first, divided by the
// time since the previous packet of that frame.
class DispersionMeter {
 public:
  void on_packet(const Packet& p, TimeNs now);
  // Sample for the interval since the last call, nullopt if no pairs seen.
  std::optional<double> take_sample();

 private:
  std::int32_t last_frame_ = -1;
  TimeNs last_time_ = 0;
  double bits_ = 0.0;
  TimeNs span_ = 0;
};

// ---------------------------------------------------------------- shared

class CbrSender {
 public:
  CbrSender(const VideoAsset& asset, int mtu_payload);

  std::vector<Packet> frame_packets(int frame) const;

 private:
  std::vector<int> packets_;
};

// Reassembles frames from packet-stream deliveries. A frame becomes
// decodable at rank r once every layer 0..r is complete.
class FrameAssembler {
 public:
  struct Ready {
    int frame;
    int rank;
  };

  FrameAssembler(int frame_count, int layer_count);

  std::vector<Ready> on_packet(const Packet& p);

 private:
  struct Unit {
    int expected = 0;
    std::set<int> seen;
  };

  int layer_count_;
  std::vector<std::vector<Unit>> received_;  // [frame][layer]
  std::vector<int> complete_rank_;
};

}  // namespace svsim
