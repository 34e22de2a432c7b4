#include "svsim/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace svsim {

bool Topology::has_node(NodeId n) const {
  return std::find(nodes.begin(), nodes.end(), n) != nodes.end();
}

const Link* Topology::find_link(LinkId id) const {
  for (const auto& l : links) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

const VideoAsset* ScenarioConfig::find_asset(const std::string& asset_name) const {
  for (const auto& a : assets) {
    if (a.name == asset_name) return &a;
  }
  return nullptr;
}

const char* to_string(AssetVariant v) {
  switch (v) {
    case AssetVariant::kSingleRate: return "single-rate";
    case AssetVariant::kSegmented: return "segmented";
    case AssetVariant::kLayered: return "layered";
  }
  return "?";
}

const char* to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kEmptyTopology: return "empty-topology";
    case ViolationCode::kDuplicateNode: return "duplicate-node";
    case ViolationCode::kUnknownNode: return "unknown-node";
    case ViolationCode::kDuplicateLinkId: return "duplicate-link-id";
    case ViolationCode::kSelfLoop: return "self-loop";
    case ViolationCode::kNonPositiveCapacity: return "non-positive-capacity";
    case ViolationCode::kInvalidQueueCapacity: return "invalid-queue-capacity";
    case ViolationCode::kNegativeDelay: return "negative-delay";
    case ViolationCode::kDisconnected: return "disconnected";
    case ViolationCode::kHostRoles: return "host-roles";
    case ViolationCode::kUnknownLink: return "unknown-link";
    case ViolationCode::kScheduleOrder: return "schedule-order";
    case ViolationCode::kDuplicateAsset: return "duplicate-asset";
    case ViolationCode::kInvalidFrameCount: return "invalid-frame-count";
    case ViolationCode::kInvalidFrameRate: return "invalid-frame-rate";
    case ViolationCode::kInvalidResolution: return "invalid-resolution";
    case ViolationCode::kInvalidBitrate: return "invalid-bitrate";
    case ViolationCode::kEmptyRepresentations: return "empty-representations";
    case ViolationCode::kDuplicateBitrate: return "duplicate-bitrate";
    case ViolationCode::kSegmentArithmetic: return "segment-arithmetic";
    case ViolationCode::kEmptyLayers: return "empty-layers";
    case ViolationCode::kLayerOrder: return "layer-order";
    case ViolationCode::kUnknownQuality: return "unknown-quality";
    case ViolationCode::kRdTableOrder: return "rd-table-order";
    case ViolationCode::kInvalidTransport: return "invalid-transport";
    case ViolationCode::kInvalidAbr: return "invalid-abr";
    case ViolationCode::kInvalidRun: return "invalid-run";
  }
  return "?";
}

std::string ValidationResult::describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << '\n';
    out << to_string(violations[i].code) << ": " << violations[i].message;
  }
  return out.str();
}

Manifest make_manifest(const VideoAsset& asset) {
  if (asset.variant != AssetVariant::kSegmented) {
    throw Error("manifest requested for non-segmented asset '" + asset.name + "'");
  }
  Manifest m;
  m.asset = asset.name;
  m.representations = asset.representations;
  m.segment_duration_s = asset.segment_duration_s;
  m.segment_count = asset.segment_count;
  for (const auto& rep : asset.representations) {
    const auto bytes = static_cast<std::int64_t>(
        std::ceil(rep.bitrate_bps * asset.segment_duration_s / 8.0 - 1e-9));
    m.segment_bytes.emplace_back(static_cast<std::size_t>(asset.segment_count), bytes);
  }
  return m;
}

double last_schedule_time(const ScenarioConfig& config) {
  double last = 0.0;
  for (const auto& s : config.schedules) {
    for (const auto& e : s.events) last = std::max(last, e.time_s);
  }
  return last;
}

namespace {

class Collector {
 public:
  void add(ViolationCode code, std::string message) {
    out_.push_back({code, std::move(message)});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void check_topology(const Topology& topo, Collector& c) {
  if (topo.nodes.empty()) {
    c.add(ViolationCode::kEmptyTopology, "topology has no nodes");
    return;
  }
  std::set<NodeId> nodes;
  for (NodeId n : topo.nodes) {
    if (!nodes.insert(n).second) {
      c.add(ViolationCode::kDuplicateNode, "node " + std::to_string(n) + " declared twice");
    }
  }
  std::set<LinkId> link_ids;
  std::unordered_map<NodeId, std::vector<NodeId>> adj;
  for (const auto& l : topo.links) {
    const std::string tag = "link " + std::to_string(l.id);
    if (!link_ids.insert(l.id).second) {
      c.add(ViolationCode::kDuplicateLinkId, "duplicate link id " + std::to_string(l.id));
    }
    bool endpoints_ok = true;
    for (NodeId n : {l.a, l.b}) {
      if (!nodes.count(n)) {
        c.add(ViolationCode::kUnknownNode, tag + " references unknown node " + std::to_string(n));
        endpoints_ok = false;
      }
    }
    if (l.a == l.b) {
      c.add(ViolationCode::kSelfLoop, tag + " connects node " + std::to_string(l.a) + " to itself");
      endpoints_ok = false;
    }
    if (!(l.capacity_bps > 0.0)) {
      c.add(ViolationCode::kNonPositiveCapacity, tag + ": capacity must be positive");
    }
    if (l.queue_capacity < 1) {
      c.add(ViolationCode::kInvalidQueueCapacity, tag + ": queue capacity must be at least 1");
    }
    if (!(l.propagation_s >= 0.0)) {
      c.add(ViolationCode::kNegativeDelay, tag + ": propagation delay must be non-negative");
    }
    if (endpoints_ok) {
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
  }

  // Connectivity by BFS from the smallest node.
  std::set<NodeId> seen{*nodes.begin()};
  std::queue<NodeId> frontier;
  frontier.push(*nodes.begin());
  while (!frontier.empty()) {
    NodeId n = frontier.front();
    frontier.pop();
    for (NodeId m : adj[n]) {
      if (seen.insert(m).second) frontier.push(m);
    }
  }
  if (seen.size() != nodes.size()) {
    c.add(ViolationCode::kDisconnected,
          "graph is not connected (" + std::to_string(nodes.size() - seen.size()) +
              " node(s) unreachable)");
  }

  if (!nodes.count(topo.client)) {
    c.add(ViolationCode::kHostRoles, "client role references unknown node " + std::to_string(topo.client));
  }
  if (!nodes.count(topo.server)) {
    c.add(ViolationCode::kHostRoles, "server role references unknown node " + std::to_string(topo.server));
  }
  if (topo.client == topo.server) {
    c.add(ViolationCode::kHostRoles, "client and server must be distinct nodes");
  }
}

void check_schedules(const ScenarioConfig& cfg, Collector& c) {
  for (const auto& s : cfg.schedules) {
    const std::string tag = "schedule for link " + std::to_string(s.link);
    if (!cfg.topology.find_link(s.link)) {
      c.add(ViolationCode::kUnknownLink, tag + ": unknown link id " + std::to_string(s.link));
    }
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      const auto& e = s.events[i];
      if (!(e.capacity_bps > 0.0)) {
        c.add(ViolationCode::kNonPositiveCapacity,
              tag + " at t=" + num(e.time_s) + ": capacity must be positive");
      }
      if (!(e.time_s >= 0.0)) {
        c.add(ViolationCode::kScheduleOrder, tag + ": event time " + num(e.time_s) + " is negative");
      }
      if (i > 0 && !(e.time_s > s.events[i - 1].time_s)) {
        c.add(ViolationCode::kScheduleOrder,
              tag + ": times must be strictly increasing (" + num(s.events[i - 1].time_s) +
                  " then " + num(e.time_s) + ")");
      }
    }
  }
}

void check_quality(const std::string& tag, const std::string& quality,
                   const RateDistortionTable& rd, Collector& c) {
  if (!rd.nominal_db.count(quality)) {
    c.add(ViolationCode::kUnknownQuality, tag + ": quality id '" + quality + "' not in rd_table");
  }
}

void check_asset(const VideoAsset& a, const RateDistortionTable& rd, Collector& c) {
  const std::string tag = "asset " + a.name;
  if (a.frame_count <= 0) {
    c.add(ViolationCode::kInvalidFrameCount, tag + ": frame count must be positive");
  }
  if (!(a.frame_rate > 0.0)) {
    c.add(ViolationCode::kInvalidFrameRate, tag + ": frame rate must be positive");
  }
  if (a.width <= 0 || a.height <= 0) {
    c.add(ViolationCode::kInvalidResolution, tag + ": resolution must be positive");
  }
  switch (a.variant) {
    case AssetVariant::kSingleRate:
      if (!(a.bitrate_bps > 0.0)) {
        c.add(ViolationCode::kInvalidBitrate, tag + ": bitrate must be positive");
      }
      check_quality(tag, a.quality, rd, c);
      break;
    case AssetVariant::kSegmented: {
      if (a.representations.empty()) {
        c.add(ViolationCode::kEmptyRepresentations, tag + ": no representations");
      }
      std::set<double> rates;
      for (const auto& r : a.representations) {
        if (!(r.bitrate_bps > 0.0)) {
          c.add(ViolationCode::kInvalidBitrate, tag + " rep " + r.id + ": bitrate must be positive");
        }
        if (!rates.insert(r.bitrate_bps).second) {
          c.add(ViolationCode::kDuplicateBitrate,
                tag + ": representation bitrate " + num(r.bitrate_bps) + " appears twice");
        }
        check_quality(tag + " rep " + r.id, r.quality, rd, c);
      }
      const double frames = a.segment_count * a.segment_duration_s * a.frame_rate;
      if (a.segment_count <= 0 || !(a.segment_duration_s > 0.0) ||
          std::abs(frames - a.frame_count) > 1e-6) {
        c.add(ViolationCode::kSegmentArithmetic,
              tag + ": segment_count x segment_duration x frame_rate = " + num(frames) +
                  " does not equal frame_count " + std::to_string(a.frame_count));
      }
      break;
    }
    case AssetVariant::kLayered:
      if (a.layers.empty()) {
        c.add(ViolationCode::kEmptyLayers, tag + ": no layers");
      }
      for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const auto& l = a.layers[i];
        if (!(l.cumulative_bps > 0.0)) {
          c.add(ViolationCode::kInvalidBitrate, tag + " layer " + l.id + ": bitrate must be positive");
        }
        if (i > 0 && !(l.cumulative_bps > a.layers[i - 1].cumulative_bps)) {
          c.add(ViolationCode::kLayerOrder,
                tag + ": cumulative layer bitrates must be strictly increasing");
        }
        check_quality(tag + " layer " + l.id, l.quality, rd, c);
      }
      break;
  }
}

}  // namespace

ValidationResult validate_scenario(const ScenarioConfig& raw) {
  Collector c;
  check_topology(raw.topology, c);
  check_schedules(raw, c);

  std::set<std::string> names;
  for (const auto& a : raw.assets) {
    if (!names.insert(a.name).second) {
      c.add(ViolationCode::kDuplicateAsset, "asset '" + a.name + "' declared twice");
    }
    check_asset(a, raw.rd_table, c);
  }

  const auto& rd = raw.rd_table;
  if (!(rd.floor_db > 0.0)) {
    c.add(ViolationCode::kRdTableOrder, "rd_table: floor psnr must be positive");
  }
  for (const auto& [id, db] : rd.nominal_db) {
    if (!(db > rd.floor_db)) {
      c.add(ViolationCode::kRdTableOrder,
            "rd_table: nominal psnr of '" + id + "' must exceed the floor");
    }
  }
  if (!(rd.cap_db >= rd.floor_db)) {
    c.add(ViolationCode::kRdTableOrder, "rd_table: cap must not be below the floor");
  }

  const auto& t = raw.transport;
  if (t.mtu_bytes <= kHeaderBytes) {
    c.add(ViolationCode::kInvalidTransport, "transport: mtu must exceed the 40-byte header");
  }
  if (!(t.rto_s > 0.0)) c.add(ViolationCode::kInvalidTransport, "transport: rto must be positive");
  if (!(t.startup_buffer_s >= 0.0)) {
    c.add(ViolationCode::kInvalidTransport, "transport: startup buffer must be non-negative");
  }
  if (t.window_packets < 1) {
    c.add(ViolationCode::kInvalidTransport, "transport: window must be at least 1 packet");
  }

  const auto& abr = raw.abr;
  if (!(abr.ewma_alpha >= 0.0 && abr.ewma_alpha <= 1.0)) {
    c.add(ViolationCode::kInvalidAbr, "abr: ewma alpha must lie in [0, 1]");
  }
  if (!(abr.safety_factor > 0.0)) c.add(ViolationCode::kInvalidAbr, "abr: safety factor must be positive");
  if (!(abr.feedback_interval_s > 0.0)) {
    c.add(ViolationCode::kInvalidAbr, "abr: feedback interval must be positive");
  }

  const auto& run = raw.run;
  if (!(run.duration_s > 0.0)) c.add(ViolationCode::kInvalidRun, "run: duration must be positive");
  if (run.duration_s < last_schedule_time(raw)) {
    c.add(ViolationCode::kInvalidRun, "run: duration " + num(run.duration_s) +
                                          " does not cover the last schedule event at " +
                                          num(last_schedule_time(raw)));
  }
  if (run.replications < 1) c.add(ViolationCode::kInvalidRun, "run: replications must be at least 1");
  if (!(run.start_jitter_s >= 0.0) || !(run.start_s - run.start_jitter_s >= 0.0)) {
    c.add(ViolationCode::kInvalidRun, "run: start time minus jitter must be non-negative");
  }
  if (!(run.throughput_bin_s > 0.0)) c.add(ViolationCode::kInvalidRun, "run: throughput bin must be positive");

  ValidationResult result;
  result.violations = c.take();
  if (result.violations.empty()) {
    ScenarioConfig out = raw;
    std::sort(out.topology.nodes.begin(), out.topology.nodes.end());
    result.scenario = std::move(out);
  }
  return result;
}

}  // namespace svsim
