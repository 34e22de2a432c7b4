#include "svsim/network.hpp"

#include <cmath>
#include <cstdio>

namespace svsim {

double transmission_time(std::int64_t bytes, double capacity_bps) {
  if (!(capacity_bps > 0.0)) throw Error("transmission_time: capacity must be positive");
  return static_cast<double>(bytes) * 8.0 / capacity_bps;
}

TimeNs transmission_time_ns(std::int64_t bytes, double capacity_bps) {
  if (!(capacity_bps > 0.0)) throw Error("transmission_time: capacity must be positive");
  return static_cast<TimeNs>(
      std::llround(static_cast<double>(bytes) * 8.0 * 1e9 / capacity_bps));
}

Network::Network(Kernel& kernel, const Topology& topology, int mtu_bytes)
    : kernel_(kernel), mtu_bytes_(mtu_bytes) {
  handler_ = kernel_.add_handler(
      "net", [this](const Event& e) { handle(e); }, {"depart", "arrive", "capacity"});
  for (const auto& l : topology.links) {
    for (auto [from, to] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
      LinkState s;
      s.link = l.id;
      s.from = from;
      s.to = to;
      s.capacity_bps = l.capacity_bps;
      s.queue_capacity = l.queue_capacity;
      s.propagation = from_seconds(l.propagation_s);
      channel_index_[{l.id, from}] = channels_.size();
      channels_.push_back(std::move(s));
    }
  }
}

void Network::register_flow(FlowId flow, NodeId src, NodeId dst, Receiver on_deliver) {
  flows_[flow] = {src, dst, std::move(on_deliver)};
  counts_[flow];
}

PacketId Network::send(Packet packet) {
  auto it = flows_.find(packet.flow);
  if (it == flows_.end()) throw Error("send on unregistered flow " + std::to_string(packet.flow));
  if (packet.size <= kHeaderBytes || packet.size > mtu_bytes_) {
    throw Error("packet size " + std::to_string(packet.size) + " outside (40, MTU]");
  }
  packet.id = records_.size();
  packet.send_time = kernel_.now();
  records_.push_back({packet.id, packet.flow, packet.size, packet.send_time});
  ++counts_[packet.flow].sent;
  const NodeId src = it->second.src;
  route_from(src, std::move(packet));
  return records_.back().id;
}

std::optional<LinkId> Network::forward(NodeId sw, const Packet& packet) const {
  return table_.lookup(sw, packet.flow);
}

void Network::route_from(NodeId node, Packet packet) {
  const auto egress = forward(node, packet);
  if (!egress) {
    drop(packet, -1, node, true);
    return;
  }
  enqueue_packet(*egress, node, std::move(packet));
}

EnqueueResult Network::enqueue_packet(LinkId link, NodeId from, Packet packet) {
  const std::size_t idx = channel_index(link, from);
  LinkState& ch = channels_[idx];
  ++ch.arrivals;
  if (static_cast<int>(ch.queue.size()) >= ch.queue_capacity) {
    ++ch.dropped;
    drop(packet, link, from, false);
    return EnqueueResult::kDropped;
  }
  ch.queue.push_back(std::move(packet));
  if (!ch.busy) start_service(idx);
  return EnqueueResult::kAccepted;
}

void Network::start_service(std::size_t idx) {
  LinkState& ch = channels_[idx];
  ch.busy = true;
  ch.busy_until = kernel_.now() + transmission_time_ns(ch.queue.front().size, ch.capacity_bps);
  kernel_.schedule(ch.busy_until, handler_, kDepart, idx);
}

void Network::depart(std::size_t idx) {
  LinkState& ch = channels_[idx];
  Packet p = std::move(ch.queue.front());
  ch.queue.pop_front();
  ++ch.delivered;
  ch.busy = false;
  const PacketId id = p.id;
  in_flight_.emplace(id, InFlight{std::move(p), ch.to});
  kernel_.schedule(kernel_.now() + ch.propagation, handler_, kArrive, id);
  if (!ch.queue.empty()) start_service(idx);
}

void Network::arrive(PacketId id) {
  auto node = in_flight_.extract(id);
  InFlight& f = node.mapped();
  const auto& ep = flows_.at(f.packet.flow);
  if (f.at == ep.dst) {
    records_[id].recv_time = kernel_.now();
    ++counts_[f.packet.flow].received;
    if (ep.on_deliver) ep.on_deliver(f.packet);
    return;
  }
  route_from(f.at, std::move(f.packet));
}

void Network::drop(const Packet& p, LinkId link, NodeId node, bool table_miss) {
  records_[p.id].dropped = true;
  records_[p.id].drop_link = link;
  ++counts_[p.flow].dropped;
  drops_.push_back({p.id, kernel_.now(), link, node, table_miss});
}

void Network::apply_bandwidth_event(LinkId link, double capacity_bps) {
  if (!(capacity_bps > 0.0)) throw Error("capacity must be positive");
  bool found = false;
  for (auto& ch : channels_) {
    if (ch.link == link) {
      ch.capacity_bps = capacity_bps;
      found = true;
    }
  }
  if (!found) throw Error("unknown link id " + std::to_string(link));
}

void Network::schedule_bandwidth_event(LinkId link, TimeNs at, double capacity_bps) {
  capacity_events_.push_back({link, capacity_bps});
  kernel_.schedule(at, handler_, kCapacity, capacity_events_.size() - 1);
}

void Network::handle(const Event& e) {
  switch (e.action) {
    case kDepart:
      depart(e.arg0);
      break;
    case kArrive:
      arrive(e.arg0);
      break;
    case kCapacity: {
      const auto& c = capacity_events_.at(e.arg0);
      apply_bandwidth_event(c.link, c.capacity_bps);
      break;
    }
    default:
      throw Error("network: unknown action");
  }
}

std::size_t Network::channel_index(LinkId link, NodeId from) const {
  auto it = channel_index_.find({link, from});
  if (it == channel_index_.end()) {
    throw Error("no link " + std::to_string(link) + " leaving node " + std::to_string(from));
  }
  return it->second;
}

const LinkState& Network::link_state(LinkId link, NodeId from) const {
  return channels_[channel_index(link, from)];
}

FlowAccounting Network::accounting(FlowId flow) const {
  FlowAccounting a;
  if (auto it = counts_.find(flow); it != counts_.end()) a = it->second;
  for (const auto& ch : channels_) {
    for (const auto& p : ch.queue) a.queued += p.flow == flow;
  }
  for (const auto& [id, f] : in_flight_) a.in_flight += f.packet.flow == flow;
  return a;
}

std::vector<FlowId> Network::flows() const {
  std::vector<FlowId> out;
  for (const auto& [id, ep] : flows_) out.push_back(id);
  return out;
}

void Network::write_delivery_log(std::ostream& out) const {
  out << "packet_id,flow_id,size,send_time,recv_time,dropped,drop_link\n";
  char buf[64];
  for (const auto& r : records_) {
    out << r.id << ',' << r.flow << ',' << r.size << ',';
    std::snprintf(buf, sizeof buf, "%.9f", to_seconds(r.send_time));
    out << buf << ',';
    if (r.recv_time >= 0) {
      std::snprintf(buf, sizeof buf, "%.9f", to_seconds(r.recv_time));
      out << buf;
    }
    out << ',' << (r.dropped ? 1 : 0) << ',';
    if (r.dropped && r.drop_link >= 0) out << r.drop_link;
    out << '\n';
  }
}

}  // namespace svsim
