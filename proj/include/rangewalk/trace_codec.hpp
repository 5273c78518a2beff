#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rangewalk/groups.hpp"
#include "rangewalk/walk.hpp"

namespace rangewalk {

/// Sequence of enumeration indices; the vertex it names is g_{v1} g_{v2} ... .
struct VertexAddress {
  std::vector<std::uint64_t> indices;

  /// Shorter first, then lexicographic.
  friend bool operator<(const VertexAddress& a, const VertexAddress& b) {
    if (a.indices.size() != b.indices.size()) return a.indices.size() < b.indices.size();
    return a.indices < b.indices;
  }
  friend bool operator==(const VertexAddress&, const VertexAddress&) = default;
};

/// Width-first code of a trace digraph: N_h for each visited vertex and the
/// positive weights O^{i,h}, keyed by (i, h).
struct TraceCode {
  std::vector<std::vector<std::uint64_t>> neighbors;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> weights;

  std::size_t vertex_count() const { return neighbors.size(); }
  friend bool operator==(const TraceCode&, const TraceCode&) = default;
};

/// Visits v_0 = e, then always the frontier vertex with the smallest address.
/// Throws StructuralError if some vertex is not reachable from e.
TraceCode encode(const TraceDigraph& trace, const Group& group);

/// Inverse of encode. Throws MalformedCode on inconsistent input.
TraceDigraph decode(const TraceCode& code, const Group& group);

/// Serialized code: 0x01, u64 |A|, then per h: u64 h, u64 |N_h|, N_h sorted;
/// then u64 count and sorted (i, h, O) triples. Integers are big-endian.
std::string serialize(const TraceCode& code);

/// serialize(encode(trace, group)).
std::string canonical_key(const TraceDigraph& trace, const Group& group);

}  // namespace rangewalk
