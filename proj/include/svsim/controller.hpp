#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "svsim/core_model.hpp"
#include "svsim/flow_table.hpp"

namespace svsim {

class RoutingError : public Error {
 public:
  using Error::Error;
};

// Minimum-hop path from src to dst (inclusive). Among equal-length paths
// the lexicographically smallest node sequence wins. Throws RoutingError
// for unknown nodes or when dst is unreachable.
std::vector<NodeId> compute_route(const Topology& topology, NodeId src, NodeId dst);

// Smallest link id joining a and b. Throws RoutingError if none exists.
LinkId link_between(const Topology& topology, NodeId a, NodeId b);

// Installs one rule per direction on every node of the path: nodes before
// the last forward `forward_flow` toward path.back(), nodes after the first
// forward `reverse_flow` toward path.front(). Returns the installed rules.
std::vector<FlowRule> install_bidirectional_rules(const Topology& topology,
                                                  std::span<const NodeId> path,
                                                  FlowId forward_flow, FlowId reverse_flow,
                                                  FlowTable& table);

// Follows installed rules hop by hop from src. Stops at dst, on a table
// miss, or after |links| hops (loop guard). Returns the visited nodes.
std::vector<NodeId> walk_rules(const Topology& topology, const FlowTable& table, NodeId src,
                               NodeId dst, FlowId flow);

// Centralized control plane. Routes are computed once and cached.
class Controller {
 public:
  explicit Controller(Topology topology) : topology_(std::move(topology)) {}

  const std::vector<NodeId>& route(NodeId src, NodeId dst);

  // Computes the src->dst route and installs rules for both directions.
  std::vector<FlowRule> connect(NodeId src, NodeId dst, FlowId forward_flow,
                                FlowId reverse_flow, FlowTable& table);

  const std::map<std::pair<NodeId, NodeId>, std::vector<NodeId>>& routes() const {
    return routes_;
  }

 private:
  Topology topology_;
  std::map<std::pair<NodeId, NodeId>, std::vector<NodeId>> routes_;
};

}  // namespace svsim
