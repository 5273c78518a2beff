#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rangewalk/groups.hpp"
#include "rangewalk/rng.hpp"

namespace rangewalk {

/// Draws support slots of a step distribution.
class StepSampler {
 public:
  explicit StepSampler(const StepDistribution& mu);

  template <class Rng>
  std::size_t slot(Rng& rng) const {
    return table_.sample(rng);
  }

 private:
  AliasTable table_;
};

/// X_1..X_n and S_0..S_n with S_0 = e and S_k = S_{k-1} X_k.
struct Trajectory {
  std::vector<GroupElement> steps;
  std::vector<GroupElement> positions;
  RngStreamSpec stream;

  std::size_t length() const { return steps.size(); }
};

/// Builds the trajectory of a given step sequence.
Trajectory trajectory_from_steps(const Group& group, std::vector<GroupElement> steps,
                                 RngStreamSpec stream = {});

/// n i.i.d. steps from mu on the given substream.
Trajectory sample_trajectory(const StepDistribution& mu, std::size_t n, RngStreamSpec stream);

/// Tilde-walk: steps X_k^-1, positions X_1^-1 ... X_k^-1.
Trajectory reversed_trajectory(const Group& group, const Trajectory& traj);

/// The range R_n together with the endpoint S_n.
///
/// On the integer line the range is kept as an interval [lo, hi] while it is
/// contiguous; a jump that leaves a gap switches to the sorted-set form. Keys
/// depend only on the set, never on the representation.
class RangeState {
 public:
  static RangeState start(const Group& group);
  /// From a sorted duplicate-free element set containing the endpoint.
  static RangeState from_set(const Group& group, std::vector<GroupElement> sorted, GroupElement endpoint,
                             std::size_t steps);

  void extend(const Group& group, const GroupElement& step);

  const GroupElement& endpoint() const { return endpoint_; }
  std::size_t steps() const { return steps_; }
  std::size_t size() const;
  bool contains(const GroupElement& g) const;
  bool is_interval() const { return interval_; }
  /// Sorted elements of the range.
  std::vector<GroupElement> elements() const;

  /// Canonical bytes of the range (and endpoint).
  std::string key(bool with_endpoint) const;

  friend bool operator==(const RangeState& a, const RangeState& b);

 private:
  void insert(const GroupElement& g);

  GroupKind kind_ = GroupKind::IntegerLine;
  bool interval_ = false;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
  std::vector<GroupElement> set_;
  GroupElement endpoint_;
  std::size_t steps_ = 0;
};

/// Canonical bytes of a finite set of integers / elements (sorted input).
std::string range_key(std::span<const GroupElement> sorted_elements);

/// Gamma_n = (A, B, C): vertices, directed edges and positive jump counts.
class TraceDigraph {
 public:
  using Edge = std::pair<GroupElement, GroupElement>;

  static TraceDigraph start(const Group& group);

  /// Records one jump x -> y.
  void add_jump(const GroupElement& x, const GroupElement& y);
  /// Adds an edge with a given weight (used by decoders); weight > 0.
  void add_edge(const GroupElement& x, const GroupElement& y, std::uint64_t weight);

  const std::set<GroupElement>& vertices() const { return vertices_; }
  const std::map<Edge, std::uint64_t>& weights() const { return weights_; }
  /// Sum of all weights.
  std::uint64_t steps() const { return steps_; }

  /// Vertices reachable from e along directed edges.
  std::set<GroupElement> reachable_from(const GroupElement& root) const;
  /// Every vertex reachable from `identity`; identity is a vertex.
  bool generated_by_walk(const GroupElement& identity) const;

  /// Structural serialization: vertices then (x, y, weight) triples.
  std::string structural_key() const;

  friend bool operator==(const TraceDigraph&, const TraceDigraph&) = default;

 private:
  std::set<GroupElement> vertices_;
  std::map<Edge, std::uint64_t> weights_;
  std::uint64_t steps_ = 0;
};

/// Range state recomputed from scratch from the positions.
RangeState range_of(const Group& group, const Trajectory& traj);
/// Trace digraph recomputed from scratch from the positions.
TraceDigraph trace_of(const Group& group, const Trajectory& traj);

/// Range and trace maintained step by step.
class IncrementalWalk {
 public:
  explicit IncrementalWalk(const Group& group);

  void step(const GroupElement& x);

  const RangeState& range() const { return range_; }
  const TraceDigraph& trace() const { return trace_; }
  const GroupElement& position() const { return range_.endpoint(); }

 private:
  const Group* group_;
  RangeState range_;
  TraceDigraph trace_;
};

}  // namespace rangewalk
