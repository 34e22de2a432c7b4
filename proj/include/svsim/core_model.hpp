#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svsim/error.hpp"

namespace svsim {

using NodeId = std::int64_t;
using LinkId = std::int64_t;
using FlowId = std::uint32_t;

// Every packet carries a fixed 40-byte header on top of its payload.
inline constexpr int kHeaderBytes = 40;

struct Link {
  LinkId id = 0;
  NodeId a = 0;
  NodeId b = 0;
  double capacity_bps = 0.0;
  double propagation_s = 0.001;
  int queue_capacity = 100;

  bool operator==(const Link&) const = default;
};

struct Topology {
  std::vector<NodeId> nodes;
  std::vector<Link> links;
  NodeId client = 0;
  NodeId server = 0;

  bool has_node(NodeId n) const;
  const Link* find_link(LinkId id) const;

  bool operator==(const Topology&) const = default;
};

struct CapacityChange {
  double time_s = 0.0;
  double capacity_bps = 0.0;

  bool operator==(const CapacityChange&) const = default;
};

struct BandwidthSchedule {
  LinkId link = 0;
  std::vector<CapacityChange> events;

  bool operator==(const BandwidthSchedule&) const = default;
};

enum class AssetVariant { kSingleRate, kSegmented, kLayered };

const char* to_string(AssetVariant v);

struct Representation {
  std::string id;
  double bitrate_bps = 0.0;
  std::string quality;

  bool operator==(const Representation&) const = default;
};

// Layer 0 is the base layer. Rates are cumulative (base + all lower layers).
struct Layer {
  std::string id;
  double cumulative_bps = 0.0;
  std::string quality;

  bool operator==(const Layer&) const = default;
};

struct VideoAsset {
  std::string name;
  AssetVariant variant = AssetVariant::kSingleRate;
  int frame_count = 1200;
  double frame_rate = 15.0;
  int width = 352;
  int height = 288;

  // single-rate
  double bitrate_bps = 0.0;
  std::string quality;

  // segmented
  std::vector<Representation> representations;
  double segment_duration_s = 0.0;
  int segment_count = 0;

  // layered
  std::vector<Layer> layers;

  bool operator==(const VideoAsset&) const = default;
};

// Simplified structural stand-in for an MPD.
struct Manifest {
  std::string asset;
  std::vector<Representation> representations;
  double segment_duration_s = 0.0;
  int segment_count = 0;
  // segment_bytes[rep][segment]
  std::vector<std::vector<std::int64_t>> segment_bytes;

  std::int64_t bytes(std::size_t rep, int segment) const {
    return segment_bytes.at(rep).at(static_cast<std::size_t>(segment));
  }
};

// Builds the manifest of a segmented asset. Segment size is
// ceil(bitrate * duration / 8) bytes. Throws Error for other variants.
Manifest make_manifest(const VideoAsset& asset);

struct TransportOptions {
  int mtu_bytes = 1500;
  double rto_s = 1.0;
  double startup_buffer_s = 2.0;
  int window_packets = 8;

  int mtu_payload() const { return mtu_bytes - kHeaderBytes; }

  bool operator==(const TransportOptions&) const = default;
};

struct AbrOptions {
  double ewma_alpha = 0.8;
  double safety_factor = 0.9;
  double feedback_interval_s = 1.0;

  bool operator==(const AbrOptions&) const = default;
};

struct RateDistortionTable {
  std::map<std::string, double> nominal_db;
  double floor_db = 10.0;
  double cap_db = 99.0;

  bool operator==(const RateDistortionTable&) const = default;
};

struct RunOptions {
  double duration_s = 100.0;
  int replications = 5;
  std::uint64_t seed = 1;
  double start_s = 0.1;
  double start_jitter_s = 0.1;
  double throughput_bin_s = 1.0;
  std::optional<int> diff_map_frame;

  bool operator==(const RunOptions&) const = default;
};

struct ScenarioConfig {
  std::string name;
  Topology topology;
  std::vector<BandwidthSchedule> schedules;
  std::vector<VideoAsset> assets;
  TransportOptions transport;
  AbrOptions abr;
  RateDistortionTable rd_table;
  RunOptions run;

  const VideoAsset* find_asset(const std::string& name) const;

  bool operator==(const ScenarioConfig&) const = default;
};

enum class ViolationCode {
  kEmptyTopology,
  kDuplicateNode,
  kUnknownNode,
  kDuplicateLinkId,
  kSelfLoop,
  kNonPositiveCapacity,
  kInvalidQueueCapacity,
  kNegativeDelay,
  kDisconnected,
  kHostRoles,
  kUnknownLink,
  kScheduleOrder,
  kDuplicateAsset,
  kInvalidFrameCount,
  kInvalidFrameRate,
  kInvalidResolution,
  kInvalidBitrate,
  kEmptyRepresentations,
  kDuplicateBitrate,
  kSegmentArithmetic,
  kEmptyLayers,
  kLayerOrder,
  kUnknownQuality,
  kRdTableOrder,
  kInvalidTransport,
  kInvalidAbr,
  kInvalidRun,
};

const char* to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string message;
};

struct ValidationResult {
  std::optional<ScenarioConfig> scenario;
  std::vector<Violation> violations;

  bool ok() const { return scenario.has_value(); }
  // All messages joined by newlines.
  std::string describe() const;
};

// Checks every invariant of the domain types and returns either the
// normalized scenario (node list sorted) or the complete list of
// violations. Validating an already validated scenario is a no-op.
ValidationResult validate_scenario(const ScenarioConfig& raw);

// Last capacity-change time across all schedules, 0 if none.
double last_schedule_time(const ScenarioConfig& config);

}  // namespace svsim
