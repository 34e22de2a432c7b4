#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "svsim/core_model.hpp"
#include "svsim/flow_table.hpp"
#include "svsim/kernel.hpp"

namespace svsim {

enum class PacketKind : std::uint8_t {
  kData,
  kManifestRequest,
  kManifest,
  kSegmentRequest,
  kAck,
  kReport,
};

using PacketId = std::uint64_t;

struct Packet {
  PacketId id = 0;
  FlowId flow = 0;
  int size = 0;  // bytes on the wire, header included
  TimeNs send_time = 0;
  PacketKind kind = PacketKind::kData;
  // Application tags: frame or segment index, representation or layer,
  // packet number within that unit and the unit's packet count.
  std::int32_t index = -1;
  std::int32_t unit = -1;
  std::int32_t seq = -1;
  std::int32_t count = 0;
  bool retransmission = false;
  double value = 0.0;
  std::shared_ptr<const std::vector<std::uint32_t>> list;
};

// Serialization time in seconds. Throws Error for capacity <= 0.
double transmission_time(std::int64_t bytes, double capacity_bps);
TimeNs transmission_time_ns(std::int64_t bytes, double capacity_bps);

// One direction of a full-duplex link. The queue includes the packet in
// service, so arrivals == delivered + dropped + queue.size() holds at
// every observation point.
struct LinkState {
  LinkId link = 0;
  NodeId from = 0;
  NodeId to = 0;
  double capacity_bps = 0.0;
  int queue_capacity = 0;
  TimeNs propagation = 0;
  std::deque<Packet> queue;
  bool busy = false;
  TimeNs busy_until = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

enum class EnqueueResult { kAccepted, kDropped };

struct PacketRecord {
  PacketId id = 0;
  FlowId flow = 0;
  int size = 0;
  TimeNs send_time = 0;
  TimeNs recv_time = -1;
  bool dropped = false;
  LinkId drop_link = -1;  // -1 for table misses
};

struct DropRecord {
  PacketId packet = 0;
  TimeNs time = 0;
  LinkId link = -1;
  NodeId node = 0;
  bool table_miss = false;
};

struct FlowAccounting {
  std::uint64_t sent = 0;
  std::uint64_t received = 0;
  std::uint64_t dropped = 0;
  std::uint64_t queued = 0;
  std::uint64_t in_flight = 0;

  bool conserved() const { return sent == received + dropped + queued + in_flight; }
};

class Network {
 public:
  using Receiver = std::function<void(const Packet&)>;

  Network(Kernel& kernel, const Topology& topology, int mtu_bytes = 1500);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  FlowTable& flow_table() { return table_; }
  const FlowTable& flow_table() const { return table_; }

  // Declares a flow's endpoints; packets reaching dst are handed to
  // on_deliver instead of being forwarded.
  void register_flow(FlowId flow, NodeId src, NodeId dst, Receiver on_deliver);

  // Injects a packet at its flow's source. Assigns id and send time.
  PacketId send(Packet packet);

  // Egress link for a packet at a switch, nullopt on a table miss.
  std::optional<LinkId> forward(NodeId sw, const Packet& packet) const;

  EnqueueResult enqueue_packet(LinkId link, NodeId from, Packet packet);

  // Replaces the capacity of both directions. The packet in service keeps
  // its scheduled departure.
  void apply_bandwidth_event(LinkId link, double capacity_bps);

  // Registers a capacity change to fire at `at`.
  void schedule_bandwidth_event(LinkId link, TimeNs at, double capacity_bps);

  const LinkState& link_state(LinkId link, NodeId from) const;
  const std::vector<LinkState>& link_states() const { return channels_; }

  const std::vector<PacketRecord>& records() const { return records_; }
  const std::vector<DropRecord>& drops() const { return drops_; }

  FlowAccounting accounting(FlowId flow) const;
  std::vector<FlowId> flows() const;

  // packet_id,flow_id,size,send_time,recv_time,dropped,drop_link
  void write_delivery_log(std::ostream& out) const;

 private:
  enum Action : std::uint32_t { kDepart, kArrive, kCapacity };

  struct FlowEndpoints {
    NodeId src;
    NodeId dst;
    Receiver on_deliver;
  };

  struct InFlight {
    Packet packet;
    NodeId at;
  };

  struct CapacityEvent {
    LinkId link;
    double capacity_bps;
  };

  void handle(const Event& e);
  void start_service(std::size_t channel);
  void depart(std::size_t channel);
  void arrive(PacketId id);
  void route_from(NodeId node, Packet packet);
  void drop(const Packet& p, LinkId link, NodeId node, bool table_miss);
  std::size_t channel_index(LinkId link, NodeId from) const;

  Kernel& kernel_;
  HandlerId handler_;
  int mtu_bytes_;
  FlowTable table_;
  std::vector<LinkState> channels_;
  std::map<std::pair<LinkId, NodeId>, std::size_t> channel_index_;
  std::map<FlowId, FlowEndpoints> flows_;
  std::unordered_map<PacketId, InFlight> in_flight_;
  std::vector<CapacityEvent> capacity_events_;
  std::vector<PacketRecord> records_;
  std::vector<DropRecord> drops_;
  std::map<FlowId, FlowAccounting> counts_;
};

}  // namespace svsim
