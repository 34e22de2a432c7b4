#include "svsim/controller.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <unordered_map>

namespace svsim {

namespace {

std::map<NodeId, std::set<NodeId>> adjacency(const Topology& t) {
  std::map<NodeId, std::set<NodeId>> adj;
  for (NodeId n : t.nodes) adj[n];
  for (const auto& l : t.links) {
    adj[l.a].insert(l.b);
    adj[l.b].insert(l.a);
  }
  return adj;
}

}  // namespace

std::vector<NodeId> compute_route(const Topology& topology, NodeId src, NodeId dst) {
  if (!topology.has_node(src)) throw RoutingError("unknown source node " + std::to_string(src));
  if (!topology.has_node(dst)) throw RoutingError("unknown destination node " + std::to_string(dst));
  if (src == dst) return {src};

  const auto adj = adjacency(topology);
  // Hop distance to dst, then walk greedily from src through the smallest
  // neighbor that is one hop closer.
  std::unordered_map<NodeId, int> dist{{dst, 0}};
  std::queue<NodeId> frontier;
  frontier.push(dst);
  while (!frontier.empty()) {
    NodeId n = frontier.front();
    frontier.pop();
    for (NodeId m : adj.at(n)) {
      if (dist.emplace(m, dist[n] + 1).second) frontier.push(m);
    }
  }
  if (!dist.count(src)) {
    throw RoutingError("no route from " + std::to_string(src) + " to " + std::to_string(dst));
  }

  std::vector<NodeId> path{src};
  NodeId at = src;
  while (at != dst) {
    const int want = dist.at(at) - 1;
    for (NodeId m : adj.at(at)) {  // ascending
      auto it = dist.find(m);
      if (it != dist.end() && it->second == want) {
        at = m;
        break;
      }
    }
    path.push_back(at);
  }
  return path;
}

LinkId link_between(const Topology& topology, NodeId a, NodeId b) {
  bool found = false;
  LinkId best = 0;
  for (const auto& l : topology.links) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) {
      if (!found || l.id < best) best = l.id;
      found = true;
    }
  }
  if (!found) {
    throw RoutingError("no link between " + std::to_string(a) + " and " + std::to_string(b));
  }
  return best;
}

std::vector<FlowRule> install_bidirectional_rules(const Topology& topology,
                                                  std::span<const NodeId> path,
                                                  FlowId forward_flow, FlowId reverse_flow,
                                                  FlowTable& table) {
  std::vector<FlowRule> rules;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const LinkId l = link_between(topology, path[i], path[i + 1]);
    rules.push_back({path[i], forward_flow, l});
    rules.push_back({path[i + 1], reverse_flow, l});
  }
  // Compute everything before touching the table so a bad path installs nothing.
  for (const auto& r : rules) table.install(r);
  return rules;
}

std::vector<NodeId> walk_rules(const Topology& topology, const FlowTable& table, NodeId src,
                               NodeId dst, FlowId flow) {
  std::vector<NodeId> visited{src};
  NodeId at = src;
  for (std::size_t hops = 0; at != dst && hops < topology.links.size(); ++hops) {
    const auto egress = table.lookup(at, flow);
    if (!egress) break;
    const Link* l = topology.find_link(*egress);
    if (!l) break;
    at = l->a == at ? l->b : l->a;
    visited.push_back(at);
  }
  return visited;
}

const std::vector<NodeId>& Controller::route(NodeId src, NodeId dst) {
  auto key = std::pair{src, dst};
  auto it = routes_.find(key);
  if (it == routes_.end()) it = routes_.emplace(key, compute_route(topology_, src, dst)).first;
  return it->second;
}

std::vector<FlowRule> Controller::connect(NodeId src, NodeId dst, FlowId forward_flow,
                                          FlowId reverse_flow, FlowTable& table) {
  const auto& path = route(src, dst);
  return install_bidirectional_rules(topology_, path, forward_flow, reverse_flow, table);
}

}  // namespace svsim
