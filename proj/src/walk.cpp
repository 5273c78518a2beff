#include "rangewalk/walk.hpp"

#include <algorithm>
#include <deque>

#include "rangewalk/error.hpp"

namespace rangewalk {

StepSampler::StepSampler(const StepDistribution& mu) {
  std::vector<double> weights;
  weights.reserve(mu.size());
  for (const auto& a : mu.atoms()) weights.push_back(a.probability);
  table_ = AliasTable(weights);
}

Trajectory trajectory_from_steps(const Group& group, std::vector<GroupElement> steps, RngStreamSpec stream) {
  Trajectory t;
  t.stream = stream;
  t.positions.reserve(steps.size() + 1);
  t.positions.push_back(group.identity());
  for (auto& s : steps) {
    s = group.canonicalize(std::move(s));
    t.positions.push_back(group.mul(t.positions.back(), s));
  }
  t.steps = std::move(steps);
  return t;
}

Trajectory sample_trajectory(const StepDistribution& mu, std::size_t n, RngStreamSpec stream) {
  const StepSampler sampler(mu);
  CounterRng rng(stream);
  const auto& group = mu.group();
  Trajectory t;
  t.stream = stream;
  t.steps.reserve(n);
  t.positions.reserve(n + 1);
  t.positions.push_back(group.identity());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& x = mu.atoms()[sampler.slot(rng)].element;
    t.steps.push_back(x);
    t.positions.push_back(group.mul(t.positions.back(), x));
  }
  return t;
}

Trajectory reversed_trajectory(const Group& group, const Trajectory& traj) {
  std::vector<GroupElement> steps;
  steps.reserve(traj.steps.size());
  for (const auto& x : traj.steps) steps.push_back(group.inverse(x));
  return trajectory_from_steps(group, std::move(steps), traj.stream);
}

// ---------------------------------------------------------------------------
// RangeState

RangeState RangeState::start(const Group& group) {
  RangeState r;
  r.kind_ = group.kind();
  r.endpoint_ = group.identity();
  if (r.kind_ == GroupKind::IntegerLine) {
    r.interval_ = true;
  } else {
    r.set_.push_back(r.endpoint_);
  }
  return r;
}

RangeState RangeState::from_set(const Group& group, std::vector<GroupElement> sorted, GroupElement endpoint,
                                std::size_t steps) {
  RangeState r;
  r.kind_ = group.kind();
  r.endpoint_ = std::move(endpoint);
  r.steps_ = steps;
  if (sorted.empty() || !std::binary_search(sorted.begin(), sorted.end(), r.endpoint_)) {
    throw ValidationError("range must contain its endpoint");
  }
  if (r.kind_ == GroupKind::IntegerLine &&
      sorted.back().value() - sorted.front().value() + 1 == static_cast<std::int64_t>(sorted.size())) {
    r.interval_ = true;
    r.lo_ = sorted.front().value();
    r.hi_ = sorted.back().value();
  } else {
    r.set_ = std::move(sorted);
  }
  return r;
}

void RangeState::insert(const GroupElement& g) {
  auto it = std::lower_bound(set_.begin(), set_.end(), g);
  if (it == set_.end() || !(*it == g)) set_.insert(it, g);
}

void RangeState::extend(const Group& group, const GroupElement& step) {
  group.mul_in_place(endpoint_, step);
  ++steps_;
  if (interval_) {
    const auto p = endpoint_.value();
    if (p >= lo_ - 1 && p <= hi_ + 1) {
      lo_ = std::min(lo_, p);
      hi_ = std::max(hi_, p);
      return;
    }
    interval_ = false;
    set_.clear();
    set_.reserve(static_cast<std::size_t>(hi_ - lo_ + 2));
    for (auto v = lo_; v <= hi_; ++v) set_.push_back(GroupElement::integer(v));
  }
  insert(endpoint_);
}

std::size_t RangeState::size() const {
  return interval_ ? static_cast<std::size_t>(hi_ - lo_ + 1) : set_.size();
}

bool RangeState::contains(const GroupElement& g) const {
  if (interval_) return g.kind() == GroupKind::IntegerLine && g.value() >= lo_ && g.value() <= hi_;
  return std::binary_search(set_.begin(), set_.end(), g);
}

std::vector<GroupElement> RangeState::elements() const {
  if (!interval_) return set_;
  std::vector<GroupElement> out;
  out.reserve(size());
  for (auto v = lo_; v <= hi_; ++v) out.push_back(GroupElement::integer(v));
  return out;
}

namespace {

void append_interval(std::string& out, std::int64_t lo, std::int64_t hi) {
  out.push_back('I');
  append_i64(out, lo);
  append_i64(out, hi);
}

}  // namespace

std::string range_key(std::span<const GroupElement> sorted) {
  std::string out;
  const bool integers = !sorted.empty() && sorted.front().kind() == GroupKind::IntegerLine;
  if (integers && sorted.back().value() - sorted.front().value() + 1 == static_cast<std::int64_t>(sorted.size())) {
    append_interval(out, sorted.front().value(), sorted.back().value());
    return out;
  }
  out.push_back('S');
  append_u64(out, sorted.size());
  for (const auto& g : sorted) append_element(out, g);
  return out;
}

std::string RangeState::key(bool with_endpoint) const {
  std::string out;
  if (interval_) {
    append_interval(out, lo_, hi_);
  } else {
    out = range_key(set_);
  }
  if (with_endpoint) {
    out.push_back('E');
    append_element(out, endpoint_);
  }
  return out;
}

bool operator==(const RangeState& a, const RangeState& b) {
  return a.steps_ == b.steps_ && a.endpoint_ == b.endpoint_ && a.size() == b.size() &&
         a.elements() == b.elements();
}

// ---------------------------------------------------------------------------
// TraceDigraph

TraceDigraph TraceDigraph::start(const Group& group) {
  TraceDigraph t;
  t.vertices_.insert(group.identity());
  return t;
}

void TraceDigraph::add_jump(const GroupElement& x, const GroupElement& y) { add_edge(x, y, 1); }

void TraceDigraph::add_edge(const GroupElement& x, const GroupElement& y, std::uint64_t weight) {
  if (weight == 0) throw ValidationError("trace edge weights must be positive");
  vertices_.insert(x);
  vertices_.insert(y);
  weights_[{x, y}] += weight;
  steps_ += weight;
}

std::set<GroupElement> TraceDigraph::reachable_from(const GroupElement& root) const {
  std::set<GroupElement> seen;
  if (!vertices_.count(root)) return seen;
  std::deque<GroupElement> queue{root};
  seen.insert(root);
  while (!queue.empty()) {
    const GroupElement x = queue.front();
    queue.pop_front();
    // edges out of x are contiguous in the (x, y) ordering
    for (auto it = weights_.lower_bound({x, GroupElement(x.kind(), {})});
         it != weights_.end() && it->first.first == x; ++it) {
      if (seen.insert(it->first.second).second) queue.push_back(it->first.second);
    }
  }
  return seen;
}

bool TraceDigraph::generated_by_walk(const GroupElement& identity) const {
  return vertices_.count(identity) && reachable_from(identity).size() == vertices_.size();
}

std::string TraceDigraph::structural_key() const {
  std::string out;
  out.push_back('V');
  append_u64(out, vertices_.size());
  for (const auto& v : vertices_) append_element(out, v);
  out.push_back('W');
  append_u64(out, weights_.size());
  for (const auto& [edge, w] : weights_) {
    append_element(out, edge.first);
    append_element(out, edge.second);
    append_u64(out, w);
  }
  return out;
}

RangeState range_of(const Group& group, const Trajectory& traj) {
  std::vector<GroupElement> sorted(traj.positions.begin(), traj.positions.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return RangeState::from_set(group, std::move(sorted), traj.positions.back(), traj.steps.size());
}

TraceDigraph trace_of(const Group& group, const Trajectory& traj) {
  TraceDigraph t = TraceDigraph::start(group);
  for (std::size_t i = 0; i + 1 < traj.positions.size(); ++i) t.add_jump(traj.positions[i], traj.positions[i + 1]);
  return t;
}

IncrementalWalk::IncrementalWalk(const Group& group)
    : group_(&group), range_(RangeState::start(group)), trace_(TraceDigraph::start(group)) {}

void IncrementalWalk::step(const GroupElement& x) {
  const GroupElement from = range_.endpoint();
  range_.extend(*group_, x);
  trace_.add_jump(from, range_.endpoint());
}

}  // namespace rangewalk
