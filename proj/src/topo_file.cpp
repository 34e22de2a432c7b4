#include "svsim/topo_file.hpp"

#include <sstream>

namespace svsim {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error("topology line " + std::to_string(line) + ": " + what);
}

template <typename T>
T read_field(std::istringstream& in, int line, const char* name) {
  T v{};
  if (!(in >> v)) fail(line, std::string("expected ") + name);
  return v;
}

}  // namespace

TopoFile parse_topo(std::string_view text) {
  TopoFile out;
  std::istringstream all{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(all, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream in(raw);
    std::string word;
    if (!(in >> word)) continue;
    if (word == "nodes") {
      NodeId n;
      while (in >> n) out.nodes.push_back(n);
      if (!in.eof()) fail(line, "node ids must be integers");
    } else if (word == "link") {
      TopoLink l;
      l.id = read_field<LinkId>(in, line, "link id");
      l.a = read_field<NodeId>(in, line, "first endpoint");
      l.b = read_field<NodeId>(in, line, "second endpoint");
      double d;
      if (in >> d) l.capacity_bps = d;
      if (in >> d) l.propagation_s = d;
      int q;
      if (in >> q) l.queue_capacity = q;
      std::string rest;
      if (in.clear(), in >> rest) fail(line, "unexpected trailing token '" + rest + "'");
      out.links.push_back(l);
    } else {
      fail(line, "unknown directive '" + word + "'");
    }
  }
  return out;
}

Topology nsfnet14(double capacity_bps, double propagation_s, int queue_capacity) {
  const TopoFile file = parse_topo(bundled_nsfnet14_topo());
  Topology t;
  t.nodes = file.nodes;
  for (const auto& l : file.links) {
    t.links.push_back({l.id, l.a, l.b, capacity_bps, propagation_s, queue_capacity});
  }
  t.client = file.nodes.front();
  t.server = file.nodes.back();
  return t;
}

std::string dump_topo(const Topology& topo) {
  std::ostringstream out;
  out << "nodes";
  for (NodeId n : topo.nodes) out << ' ' << n;
  out << '\n';
  for (const auto& l : topo.links) {
    out << "link " << l.id << ' ' << l.a << ' ' << l.b << '\n';
  }
  return out.str();
}

}  // namespace svsim
