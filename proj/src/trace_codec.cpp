#include "rangewalk/trace_codec.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "rangewalk/error.hpp"

namespace rangewalk {

namespace {

struct FrontierEntry {
  VertexAddress address;
  GroupElement vertex;

  friend bool operator<(const FrontierEntry& a, const FrontierEntry& b) { return a.address < b.address; }
};

// Frontier with eager removal of every address that names a given vertex.
class Frontier {
 public:
  void push(VertexAddress address, GroupElement vertex) {
    auto it = entries_.insert({std::move(address), vertex}).first;
    by_vertex_[vertex].push_back(it);
  }

  bool empty() const { return entries_.empty(); }

  const FrontierEntry& top() const { return *entries_.begin(); }

  void purge(const GroupElement& vertex) {
    auto found = by_vertex_.find(vertex);
    if (found == by_vertex_.end()) return;
    for (auto it : found->second) entries_.erase(it);
    by_vertex_.erase(found);
  }

 private:
  std::set<FrontierEntry> entries_;
  std::unordered_map<GroupElement, std::vector<std::set<FrontierEntry>::iterator>, GroupElementHash> by_vertex_;
};

VertexAddress child(const VertexAddress& parent, std::uint64_t i) {
  VertexAddress a = parent;
  a.indices.push_back(i);
  return a;
}

}  // namespace

TraceCode encode(const TraceDigraph& trace, const Group& group) {
  const GroupElement e = group.identity();
  if (!trace.vertices().count(e)) throw StructuralError("trace digraph does not contain e");

  // out-edges per vertex, keyed by the enumeration index of x^-1 y
  std::map<GroupElement, std::vector<std::pair<std::uint64_t, std::uint64_t>>> out;
  for (const auto& [edge, w] : trace.weights()) {
    const auto i = group.index_of(group.mul(group.inverse(edge.first), edge.second));
    out[edge.first].emplace_back(i, w);
  }

  TraceCode code;
  std::set<GroupElement> visited;
  Frontier frontier;
  VertexAddress address;
  GroupElement v = e;
  while (true) {
    visited.insert(v);
    frontier.purge(v);
    const auto h = code.neighbors.size();
    std::vector<std::uint64_t> nh;
    if (auto it = out.find(v); it != out.end()) {
      auto& edges = it->second;
      std::sort(edges.begin(), edges.end());
      for (const auto& [i, w] : edges) {
        nh.push_back(i);
        code.weights[{i, h}] = w;
        GroupElement y = group.mul(v, group.enumerate(i));
        if (!visited.count(y)) frontier.push(child(address, i), std::move(y));
      }
    }
    code.neighbors.push_back(std::move(nh));
    if (frontier.empty()) break;
    address = frontier.top().address;
    v = frontier.top().vertex;
  }
  if (visited.size() != trace.vertices().size()) {
    throw StructuralError("trace digraph has vertices not reachable from e");
  }
  return code;
}

TraceDigraph decode(const TraceCode& code, const Group& group) {
  if (code.neighbors.empty()) throw MalformedCode("code has no vertices");
  const auto count = code.neighbors.size();

  // N_h must be exactly the support of O^{., h}
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> columns(count);
  for (const auto& [key, w] : code.weights) {
    const auto [i, h] = key;
    if (h >= count) throw MalformedCode("weight O^{i,h} with h beyond the vertex count");
    if (w == 0) throw MalformedCode("zero weight stored in code");
    columns[h].emplace_back(i, w);
  }
  for (std::size_t h = 0; h < count; ++h) {
    auto nh = code.neighbors[h];
    std::sort(nh.begin(), nh.end());
    if (std::adjacent_find(nh.begin(), nh.end()) != nh.end()) throw MalformedCode("repeated index in N_h");
    std::vector<std::uint64_t> support;
    for (const auto& c : columns[h]) support.push_back(c.first);
    if (nh != support) throw MalformedCode("N_h disagrees with the positive weights O^{i,h}");
  }

  TraceDigraph trace = TraceDigraph::start(group);
  std::set<GroupElement> visited;
  Frontier frontier;
  VertexAddress address;
  GroupElement v = group.identity();
  for (std::size_t h = 0;; ++h) {
    visited.insert(v);
    frontier.purge(v);
    for (const auto& [i, w] : columns[h]) {
      GroupElement y = group.mul(v, group.enumerate(i));
      trace.add_edge(v, y, w);
      if (!visited.count(y)) frontier.push(child(address, i), std::move(y));
    }
    if (h + 1 == count) {
      if (!frontier.empty()) throw MalformedCode("code ends while unvisited vertices remain");
      break;
    }
    if (frontier.empty()) throw MalformedCode("frontier exhausted before all N_h were used");
    address = frontier.top().address;
    v = frontier.top().vertex;
  }
  return trace;
}

std::string serialize(const TraceCode& code) {
  std::string out;
  out.push_back(static_cast<char>(0x01));
  append_u64(out, code.neighbors.size());
  for (std::size_t h = 0; h < code.neighbors.size(); ++h) {
    auto nh = code.neighbors[h];
    std::sort(nh.begin(), nh.end());
    append_u64(out, h);
    append_u64(out, nh.size());
    for (auto i : nh) append_u64(out, i);
  }
  append_u64(out, code.weights.size());
  for (const auto& [key, w] : code.weights) {
    append_u64(out, key.first);
    append_u64(out, key.second);
    append_u64(out, w);
  }
  return out;
}

std::string canonical_key(const TraceDigraph& trace, const Group& group) { return serialize(encode(trace, group)); }

}  // namespace rangewalk
