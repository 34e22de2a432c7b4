#pragma once

// Plain-text topology assets:
//
//   # comment
//   nodes 1 2 3
//   link <id> <a> <b> [capacity_bps [propagation_s [queue_packets]]]
//
// Omitted link attributes are filled from scenario defaults.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "svsim/core_model.hpp"

namespace svsim {

struct TopoLink {
  LinkId id = 0;
  NodeId a = 0;
  NodeId b = 0;
  std::optional<double> capacity_bps;
  std::optional<double> propagation_s;
  std::optional<int> queue_capacity;
};

struct TopoFile {
  std::vector<NodeId> nodes;
  std::vector<TopoLink> links;
};

TopoFile parse_topo(std::string_view text);

// Text of the bundled 14-node / 21-link NSFNET T1 graph (nodes 1..14).
std::string_view bundled_nsfnet14_topo();

// The bundled graph as a Topology with uniform link attributes. Host roles
// are left at their defaults; routing tests use the bare graph.
Topology nsfnet14(double capacity_bps = 100e6, double propagation_s = 0.001,
                  int queue_capacity = 100);

// One "link id a b" line per link, preceded by the node list.
std::string dump_topo(const Topology& topo);

}  // namespace svsim
