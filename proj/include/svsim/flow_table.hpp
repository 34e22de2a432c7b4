#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "svsim/core_model.hpp"

namespace svsim {

struct FlowRule {
  NodeId switch_node = 0;
  FlowId flow = 0;
  LinkId egress = 0;

  bool operator==(const FlowRule&) const = default;
};

// At most one rule per (switch, flow); installing over an existing key
// replaces it.
class FlowTable {
 public:
  void install(const FlowRule& rule) { rules_[{rule.switch_node, rule.flow}] = rule.egress; }

  std::optional<LinkId> lookup(NodeId sw, FlowId flow) const {
    auto it = rules_.find({sw, flow});
    if (it == rules_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return rules_.size(); }

  std::vector<FlowRule> rules() const {
    std::vector<FlowRule> out;
    for (const auto& [key, link] : rules_) out.push_back({key.first, key.second, link});
    return out;
  }

  // "switch,flow_id,egress_link" with a header row, sorted by switch then flow.
  void dump_csv(std::ostream& out) const {
    out << "switch,flow_id,egress_link\n";
    for (const auto& [key, link] : rules_) {
      out << key.first << ',' << key.second << ',' << link << '\n';
    }
  }

 private:
  std::map<std::pair<NodeId, FlowId>, LinkId> rules_;
};

}  // namespace svsim
