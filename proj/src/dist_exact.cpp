#include "rangewalk/dist_exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "rangewalk/detail/neumaier.hpp"
#include "rangewalk/error.hpp"
#include "rangewalk/rng.hpp"
#include "rangewalk/trace_codec.hpp"

namespace rangewalk {

// ---------------------------------------------------------------------------
// LawTable

template <class P>
LawTable<P>::LawTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].second > 0)) throw ValidationError("law table probabilities must be positive");
    if (i > 0 && entries_[i - 1].first == entries_[i].first) throw ValidationError("duplicate key in law table");
  }
}

template <class P>
P LawTable<P>::probability(std::string_view key) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, std::string_view k) { return e.first < k; });
  if (it == entries_.end() || it->first != key) return P(0);
  return it->second;
}

template <class P>
P LawTable<P>::total() const {
  P sum(0);
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

template class LawTable<double>;
template class LawTable<Rational>;

namespace {

double as_double(double p) { return p; }
double as_double(const Rational& p) { return to_double(p); }

template <class P>
std::vector<P> step_probabilities(const StepDistribution& mu) {
  std::vector<P> out;
  if constexpr (std::is_same_v<P, Rational>) {
    if (!mu.has_exact()) throw ValidationError("rational mode needs a measure with rational probabilities");
    out.assign(mu.exact().begin(), mu.exact().end());
  } else {
    for (const auto& a : mu.atoms()) out.push_back(a.probability);
  }
  return out;
}

using detail::NeumaierSum;

// Hash table of states that remembers first-insertion order. Iterating in
// that order keeps floating-point summation order, and therefore every
// result, identical from run to run.
template <class Key>
struct KeyTraits {
  using View = Key;
  static View view(const Key& k) { return k; }
  static std::size_t hash(View v) { return mix64(v); }
};

template <>
struct KeyTraits<std::string> {
  using View = std::string_view;
  static View view(const std::string& k) { return k; }
  static std::size_t hash(View v) { return std::hash<std::string_view>{}(v); }
};

template <>
struct KeyTraits<std::u32string> {
  using View = std::u32string_view;
  static View view(const std::u32string& k) { return k; }
  static std::size_t hash(View v) { return std::hash<std::u32string_view>{}(v); }
};

template <class Key, class V>
class StateTable {
  using Traits = KeyTraits<Key>;
  using View = typename Traits::View;
  using Items = std::vector<std::pair<Key, V>>;

  struct Hash {
    using is_transparent = void;
    const Items* items;
    std::size_t operator()(std::uint32_t i) const { return Traits::hash(Traits::view((*items)[i].first)); }
    std::size_t operator()(View v) const { return Traits::hash(v); }
  };
  struct Eq {
    using is_transparent = void;
    const Items* items;
    View at(std::uint32_t i) const { return Traits::view((*items)[i].first); }
    View at(View v) const { return v; }
    template <class A, class B>
    bool operator()(const A& a, const B& b) const {
      return at(a) == at(b);
    }
  };

 public:
  StateTable()
      : items_(std::make_unique<Items>()), index_(0, Hash{items_.get()}, Eq{items_.get()}) {}

  /// Value slot for `key`, default-inserting `init` when new.
  std::pair<V*, bool> upsert(Key&& key, const V& init) {
    auto it = index_.find(Traits::view(key));
    if (it != index_.end()) return {&(*items_)[*it].second, false};
    items_->emplace_back(std::move(key), init);
    index_.insert(static_cast<std::uint32_t>(items_->size() - 1));
    return {&items_->back().second, true};
  }

  const Items& items() const { return *items_; }
  std::size_t size() const { return items_->size(); }
  void reserve(std::size_t n) {
    items_->reserve(n);
    index_.reserve(n);
  }

 private:
  std::unique_ptr<Items> items_;
  absl::flat_hash_set<std::uint32_t, Hash, Eq> index_;
};

void check_cap(std::size_t size, const ExactOptions& options, std::size_t layer) {
  if (size > options.state_cap) {
    std::ostringstream msg;
    msg << "exact law at n=" << layer << " exceeds the state cap of " << options.state_cap
        << " states (raise --state-cap or lower n)";
    throw ResourceError(msg.str());
  }
}

// Interned group elements with a memoized transition table id x slot -> id.
class Interner {
 public:
  static constexpr std::uint32_t kUnset = 0xffffffffu;

  explicit Interner(const StepDistribution& mu) : group_(&mu.group()), slots_(mu.size()) {
    for (const auto& a : mu.atoms()) steps_.push_back(a.element);
    id(group_->identity());
  }

  std::uint32_t id(const GroupElement& g) {
    auto [it, fresh] = ids_.try_emplace(g, static_cast<std::uint32_t>(elements_.size()));
    if (fresh) {
      if (elements_.size() >= kUnset - 1) throw ResourceError("too many distinct group elements");
      elements_.push_back(g);
      next_.resize(elements_.size() * slots_, kUnset);
    }
    return it->second;
  }

  std::uint32_t next(std::uint32_t from, std::size_t slot) {
    const std::size_t cell = static_cast<std::size_t>(from) * slots_ + slot;
    if (next_[cell] == kUnset) {
      const auto to = id(group_->mul(elements_[from], steps_[slot]));
      next_[cell] = to;
    }
    return next_[cell];
  }

  const GroupElement& element(std::uint32_t id) const { return elements_[id]; }
  const Group& group() const { return *group_; }
  std::size_t slots() const { return slots_; }

 private:
  const Group* group_;
  std::size_t slots_;
  std::vector<GroupElement> steps_;
  std::vector<GroupElement> elements_;
  std::vector<std::uint32_t> next_;
  std::unordered_map<GroupElement, std::uint32_t, GroupElementHash> ids_;
};

// ---------------------------------------------------------------------------
// Range DP. A state key is the sorted list of range ids followed by the
// endpoint id.

template <class P>
using RangeLayer = StateTable<std::u32string, P>;

// Number of hash partitions for the final layer. Partitioning only happens
// when the caller consumes the layer piecewise (entropies), never for laws.
std::size_t final_parts(std::size_t parents, std::size_t slots, const ExactOptions& options, bool allow) {
  if (!allow || options.partition_budget == 0) return 1;
  const std::size_t children = parents * slots;
  return std::max<std::size_t>(1, (children + options.partition_budget - 1) / options.partition_budget);
}

template <class P, class OnLayer>
void range_dp(const StepDistribution& mu, std::size_t n, const ExactOptions& options, Interner& interner,
              bool partition_final, OnLayer&& on_layer) {
  const auto probs = step_probabilities<P>(mu);
  const std::uint32_t e = 0;
  auto cur = std::make_unique<RangeLayer<P>>();
  cur->upsert(std::u32string{e, e}, P(1));
  on_layer(std::size_t{0}, *cur);
  for (std::size_t layer = 1; layer <= n; ++layer) {
    const std::size_t parts = layer == n ? final_parts(cur->size(), probs.size(), options, partition_final) : 1;
    for (std::size_t part = 0; part < parts; ++part) {
      auto next = std::make_unique<RangeLayer<P>>();
      next->reserve(cur->size() * 2 / parts);
      for (const auto& [key, p] : cur->items()) {
        const std::u32string_view ids(key.data(), key.size() - 1);
        const std::uint32_t end = key.back();
        for (std::size_t slot = 0; slot < probs.size(); ++slot) {
          const std::uint32_t y = interner.next(end, slot);
          std::u32string child;
          child.reserve(key.size() + 1);
          auto pos = std::lower_bound(ids.begin(), ids.end(), y);
          if (pos != ids.end() && *pos == y) {
            child.assign(ids);
          } else {
            child.append(ids.begin(), pos);
            child.push_back(y);
            child.append(pos, ids.end());
          }
          // partition on the range part so each marginal stays in one piece
          if (parts > 1 && mix64(std::hash<std::u32string_view>{}(child)) % parts != part) continue;
          child.push_back(y);
          const P q = p * probs[slot];
          auto [value, fresh] = next->upsert(std::move(child), q);
          if (!fresh) *value += q;
        }
        check_cap(next->size(), options, layer);
      }
      if (layer == n && parts > 1) {
        on_layer(layer, *next);
      } else {
        cur = std::move(next);
      }
    }
    if (parts == 1) on_layer(layer, *cur);
  }
}

// Interval DP on the integer line for steps in {-1, 0, +1}. State packs
// (lo, hi, pos) with each coordinate offset by 2^20.
constexpr std::int64_t kIntervalOffset = std::int64_t{1} << 20;

std::uint64_t pack_interval(std::int64_t lo, std::int64_t hi, std::int64_t pos) {
  return (static_cast<std::uint64_t>(lo + kIntervalOffset) << 42) |
         (static_cast<std::uint64_t>(hi + kIntervalOffset) << 21) | static_cast<std::uint64_t>(pos + kIntervalOffset);
}

struct Interval {
  std::int64_t lo, hi, pos;
};

Interval unpack_interval(std::uint64_t k) {
  const std::uint64_t mask = (std::uint64_t{1} << 21) - 1;
  return {static_cast<std::int64_t>(k >> 42) - kIntervalOffset,
          static_cast<std::int64_t>((k >> 21) & mask) - kIntervalOffset,
          static_cast<std::int64_t>(k & mask) - kIntervalOffset};
}

template <class P>
using IntervalLayer = StateTable<std::uint64_t, P>;

template <class P, class OnLayer>
void interval_dp(const StepDistribution& mu, std::size_t n, const ExactOptions& options, OnLayer&& on_layer) {
  if (n >= static_cast<std::size_t>(kIntervalOffset) - 1) throw ResourceError("interval DP supports n < 2^20 - 1");
  const auto probs = step_probabilities<P>(mu);
  std::vector<std::int64_t> steps;
  for (const auto& a : mu.atoms()) steps.push_back(a.element.value());
  auto cur = std::make_unique<IntervalLayer<P>>();
  cur->upsert(pack_interval(0, 0, 0), P(1));
  on_layer(std::size_t{0}, *cur);
  for (std::size_t layer = 1; layer <= n; ++layer) {
    auto next = std::make_unique<IntervalLayer<P>>();
    next->reserve(cur->size() * 2);
    for (const auto& [key, p] : cur->items()) {
      const auto s = unpack_interval(key);
      for (std::size_t slot = 0; slot < steps.size(); ++slot) {
        const auto y = s.pos + steps[slot];
        const P q = p * probs[slot];
        auto [value, fresh] = next->upsert(pack_interval(std::min(s.lo, y), std::max(s.hi, y), y), q);
        if (!fresh) *value += q;
      }
    }
    check_cap(next->size(), options, layer);
    cur = std::move(next);
    on_layer(layer, *cur);
  }
}

// ---------------------------------------------------------------------------
// Trace DP. A state key is the sorted array of packed edges
// (from_id << 32 | slot << 24 | weight); the endpoint rides along as a value.

template <class P>
struct TraceValue {
  P p;
  std::uint32_t endpoint;
};

template <class P>
using TraceLayer = StateTable<std::string, TraceValue<P>>;

constexpr std::uint64_t kWeightMask = (std::uint64_t{1} << 24) - 1;

std::vector<std::uint64_t> unpack_edges(const std::string& key) {
  std::vector<std::uint64_t> edges(key.size() / 8);
  std::memcpy(edges.data(), key.data(), key.size());
  return edges;
}

std::string pack_edges(const std::vector<std::uint64_t>& edges) {
  std::string key(edges.size() * 8, '\0');
  std::memcpy(key.data(), edges.data(), key.size());
  return key;
}

template <class P, class OnLayer>
void trace_dp(const StepDistribution& mu, std::size_t n, const ExactOptions& options, Interner& interner,
              bool partition_final, OnLayer&& on_layer) {
  if (mu.size() > 255) throw UnsupportedError("trace DP supports at most 255 support points");
  if (n >= kWeightMask) throw UnsupportedError("trace DP supports n < 2^24");
  const auto probs = step_probabilities<P>(mu);
  auto cur = std::make_unique<TraceLayer<P>>();
  cur->upsert(std::string{}, TraceValue<P>{P(1), 0});
  on_layer(std::size_t{0}, *cur);
  std::vector<std::uint64_t> edges;
  for (std::size_t layer = 1; layer <= n; ++layer) {
    const std::size_t parts = layer == n ? final_parts(cur->size(), probs.size(), options, partition_final) : 1;
    for (std::size_t part = 0; part < parts; ++part) {
      auto next = std::make_unique<TraceLayer<P>>();
      next->reserve(cur->size() * 2 / parts);
      for (const auto& [key, v] : cur->items()) {
        for (std::size_t slot = 0; slot < probs.size(); ++slot) {
          edges = unpack_edges(key);
          const std::uint64_t head = (static_cast<std::uint64_t>(v.endpoint) << 32) | (std::uint64_t{slot} << 24);
          auto pos = std::lower_bound(edges.begin(), edges.end(), head);
          if (pos != edges.end() && (*pos & ~kWeightMask) == head) {
            ++*pos;
          } else {
            edges.insert(pos, head | 1);
          }
          auto child = pack_edges(edges);
          if (parts > 1 && mix64(std::hash<std::string_view>{}(child)) % parts != part) continue;
          const std::uint32_t y = interner.next(v.endpoint, slot);
          const P q = v.p * probs[slot];
          auto [value, fresh] = next->upsert(std::move(child), TraceValue<P>{q, y});
          if (!fresh) {
            if (value->endpoint != y) throw InternalConsistencyError("one trace digraph reached with two endpoints");
            value->p += q;
          }
        }
        check_cap(next->size(), options, layer);
      }
      if (layer == n && parts > 1) {
        on_layer(layer, *next);
      } else {
        cur = std::move(next);
      }
    }
    if (parts == 1) on_layer(layer, *cur);
  }
}

TraceDigraph trace_from_key(const std::string& key, Interner& interner) {
  auto trace = TraceDigraph::start(interner.group());
  for (auto packed : unpack_edges(key)) {
    const auto from = static_cast<std::uint32_t>(packed >> 32);
    const auto slot = static_cast<std::size_t>((packed >> 24) & 0xff);
    trace.add_edge(interner.element(from), interner.element(interner.next(from, slot)), packed & kWeightMask);
  }
  return trace;
}

std::string endpoint_suffix(const GroupElement& endpoint) {
  std::string out(1, 'E');
  append_element(out, endpoint);
  return out;
}

// Final-layer atoms of (R_n, S_n).
template <class P>
struct RangeAtom {
  std::vector<GroupElement> range;
  GroupElement endpoint;
  P p;
};

template <class P>
std::vector<RangeAtom<P>> range_atoms(const StepDistribution& mu, std::size_t n, const ExactOptions& options) {
  std::vector<RangeAtom<P>> out;
  if (options.interval_dp && interval_dp_applies(mu)) {
    interval_dp<P>(mu, n, options, [&](std::size_t layer, const IntervalLayer<P>& t) {
      if (layer != n) return;
      for (const auto& [key, p] : t.items()) {
        const auto s = unpack_interval(key);
        RangeAtom<P> a{{}, GroupElement::integer(s.pos), p};
        for (auto v = s.lo; v <= s.hi; ++v) a.range.push_back(GroupElement::integer(v));
        out.push_back(std::move(a));
      }
    });
    return out;
  }
  Interner interner(mu);
  range_dp<P>(mu, n, options, interner, false, [&](std::size_t layer, const RangeLayer<P>& t) {
    if (layer != n) return;
    for (const auto& [key, p] : t.items()) {
      RangeAtom<P> a{{}, interner.element(key.back()), p};
      for (std::size_t i = 0; i + 1 < key.size(); ++i) a.range.push_back(interner.element(key[i]));
      std::sort(a.range.begin(), a.range.end());
      out.push_back(std::move(a));
    }
  });
  return out;
}

template <class P>
LawTable<P> range_law(const StepDistribution& mu, std::size_t n, const ExactOptions& options, bool with_endpoint) {
  const auto& group = mu.group();
  std::vector<std::pair<std::string, P>> entries;
  std::map<std::string, P> marginal;
  for (auto& a : range_atoms<P>(mu, n, options)) {
    auto key = RangeState::from_set(group, std::move(a.range), a.endpoint, n).key(with_endpoint);
    if (with_endpoint) {
      entries.emplace_back(std::move(key), a.p);
    } else {
      marginal[key] += a.p;
    }
  }
  if (!with_endpoint) {
    for (auto& [k, p] : marginal) entries.emplace_back(k, p);
  }
  return LawTable<P>(std::move(entries));
}

template <class P>
LawTable<P> trace_law(const StepDistribution& mu, std::size_t n, bool with_endpoint, const ExactOptions& options) {
  Interner interner(mu);
  std::vector<std::pair<std::string, P>> entries;
  trace_dp<P>(mu, n, options, interner, false, [&](std::size_t layer, const TraceLayer<P>& t) {
    if (layer != n) return;
    entries.reserve(t.size());
    for (const auto& [key, v] : t.items()) {
      auto k = trace_from_key(key, interner).structural_key();
      if (with_endpoint) k += endpoint_suffix(interner.element(v.endpoint));
      entries.emplace_back(std::move(k), v.p);
    }
  });
  return LawTable<P>(std::move(entries));
}

template <class P>
LawTable<P> paths_engine(const StepDistribution& mu, std::size_t n, Outcome outcome, const ExactOptions& options) {
  const auto& group = mu.group();
  const std::size_t k = mu.size();
  std::uint64_t paths = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (paths > options.path_cap / k) {
      throw ResourceError("path enumeration exceeds the path cap of " + std::to_string(options.path_cap) + " paths");
    }
    paths *= k;
  }
  const auto probs = step_probabilities<P>(mu);
  std::size_t depth = 0;
  std::uint64_t jobs = 1;
  while (depth < n && jobs < 64) {
    jobs *= k;
    ++depth;
  }
  const std::uint64_t per_job = paths / jobs;

  std::vector<std::unique_ptr<StateTable<std::string, P>>> partial(jobs);
  parallel_for(jobs, resolve_workers(options.workers), [&](std::size_t j) {
    auto table = std::make_unique<StateTable<std::string, P>>();
    std::vector<std::size_t> slots(n);
    for (std::uint64_t s = 0; s < per_job; ++s) {
      // most significant digit first: prefix j, then suffix s
      std::uint64_t rest = s;
      for (std::size_t i = n; i-- > depth;) {
        slots[i] = rest % k;
        rest /= k;
      }
      rest = j;
      for (std::size_t i = depth; i-- > 0;) {
        slots[i] = rest % k;
        rest /= k;
      }
      IncrementalWalk walk(group);
      P prob(1);
      for (auto slot : slots) {
        walk.step(mu.atoms()[slot].element);
        prob = prob * probs[slot];
      }
      auto [value, fresh] = table->upsert(outcome_key(group, walk, outcome), prob);
      if (!fresh) *value += prob;
      check_cap(table->size(), options, n);
    }
    partial[j] = std::move(table);
  });

  StateTable<std::string, P> merged;
  for (auto& table : partial) {
    for (const auto& [key, p] : table->items()) {
      auto [value, fresh] = merged.upsert(std::string(key), p);
      if (!fresh) *value += p;
    }
    check_cap(merged.size(), options, n);
    table.reset();
  }
  std::vector<std::pair<std::string, P>> entries(merged.items().begin(), merged.items().end());
  return LawTable<P>(std::move(entries));
}

template <class Table>
double layer_entropy(const Table& t) {
  std::vector<double> probs;
  probs.reserve(t.size());
  for (const auto& item : t.items()) {
    if constexpr (requires { item.second.endpoint; }) {
      probs.push_back(as_double(item.second.p));
    } else {
      probs.push_back(as_double(item.second));
    }
  }
  return entropy_of(std::move(probs));
}

template <class P>
EntropySequence sequence_impl(const StepDistribution& mu, std::size_t n_max, const SequenceOptions& options) {
  EntropySequence seq;
  seq.rational = std::is_same_v<P, Rational>;
  seq.h_r.resize(n_max + 1);
  seq.h_rs.resize(n_max + 1);

  if (options.exact.interval_dp && interval_dp_applies(mu)) {
    interval_dp<P>(mu, n_max, options.exact, [&](std::size_t layer, const IntervalLayer<P>& t) {
      seq.h_rs[layer] = layer_entropy(t);
      StateTable<std::uint64_t, P> marginal;
      for (const auto& [key, p] : t.items()) {
        const auto s = unpack_interval(key);
        auto [value, fresh] = marginal.upsert(pack_interval(s.lo, s.hi, 0), p);
        if (!fresh) *value += p;
      }
      seq.h_r[layer] = layer_entropy(marginal);
    });
  } else {
    Interner interner(mu);
    range_dp<P>(mu, n_max, options.exact, interner, true, [&](std::size_t layer, const RangeLayer<P>& t) {
      // the final layer may arrive in several partitions
      seq.h_rs[layer] += layer_entropy(t);
      StateTable<std::u32string, P> marginal;
      for (const auto& [key, p] : t.items()) {
        auto [value, fresh] = marginal.upsert(std::u32string(key, 0, key.size() - 1), p);
        if (!fresh) *value += p;
      }
      seq.h_r[layer] += layer_entropy(marginal);
    });
  }

  if (options.trace) {
    const auto trace_n = std::min(n_max, options.trace_n_max);
    seq.h_g.resize(trace_n + 1);
    seq.h_gs.resize(trace_n + 1);
    Interner interner(mu);
    trace_dp<P>(mu, trace_n, options.exact, interner, true, [&](std::size_t layer, const TraceLayer<P>& t) {
      const double h = layer_entropy(t);
      seq.h_g[layer] += h;
      seq.h_gs[layer] += h;
    });
  }
  return seq;
}

template <class P>
AepSummary aep_impl(const Group& group, const LawTable<P>& law, std::size_t n,
                    std::span<const Trajectory> trajectories) {
  AepSummary out;
  for (const auto& t : trajectories) {
    if (t.steps.size() != n) throw ValidationError("trajectory length differs from the law's n");
    const auto q = law.probability(range_of(group, t).key(true));
    if (!(q > 0)) throw InternalConsistencyError("trajectory outcome missing from the exact law");
    out.values.push_back(n == 0 ? 0.0 : -std::log(as_double(q)) / static_cast<double>(n));
  }
  if (!out.values.empty()) {
    NeumaierSum sum;
    for (double v : out.values) sum.add(v);
    out.mean = sum.value() / static_cast<double>(out.values.size());
    if (out.values.size() > 1) {
      NeumaierSum sq;
      for (double v : out.values) sq.add((v - out.mean) * (v - out.mean));
      out.variance = sq.value() / static_cast<double>(out.values.size() - 1);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double entropy_of(std::vector<double> probabilities) {
  std::sort(probabilities.begin(), probabilities.end());
  NeumaierSum sum;
  for (double p : probabilities) {
    if (p > 0) sum.add(-p * std::log(p));
  }
  return sum.value();
}

double entropy(const Law& law) {
  std::vector<double> probs;
  probs.reserve(law.size());
  for (const auto& e : law.entries()) probs.push_back(e.second);
  return entropy_of(std::move(probs));
}

double entropy(const ExactLaw& law) { return entropy(to_double(law)); }

Law to_double(const ExactLaw& law) {
  std::vector<Law::Entry> entries;
  entries.reserve(law.size());
  for (const auto& [k, p] : law.entries()) entries.emplace_back(k, to_double(p));
  return Law(std::move(entries));
}

double total_variation(const Law& a, const Law& b) {
  NeumaierSum sum;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  while (ia != a.entries().end() || ib != b.entries().end()) {
    if (ib == b.entries().end() || (ia != a.entries().end() && ia->first < ib->first)) {
      sum.add(ia++->second);
    } else if (ia == a.entries().end() || ib->first < ia->first) {
      sum.add(ib++->second);
    } else {
      sum.add(std::abs(ia++->second - ib++->second));
    }
  }
  return 0.5 * sum.value();
}

std::string outcome_key(const Group& group, const IncrementalWalk& walk, Outcome outcome) {
  switch (outcome) {
    case Outcome::RangeEndpoint:
      return walk.range().key(true);
    case Outcome::Range:
      return walk.range().key(false);
    case Outcome::Trace:
      return walk.trace().structural_key();
    case Outcome::TraceEndpoint:
      return walk.trace().structural_key() + endpoint_suffix(walk.position());
    case Outcome::Code:
      return canonical_key(walk.trace(), group);
    case Outcome::CodeEndpoint:
      return canonical_key(walk.trace(), group) + endpoint_suffix(walk.position());
  }
  throw ValidationError("unknown outcome kind");
}

Law law_by_paths(const StepDistribution& mu, std::size_t n, Outcome outcome, const ExactOptions& options) {
  return paths_engine<double>(mu, n, outcome, options);
}

ExactLaw exact_law_by_paths(const StepDistribution& mu, std::size_t n, Outcome outcome, const ExactOptions& options) {
  return paths_engine<Rational>(mu, n, outcome, options);
}

Law law_range_endpoint(const StepDistribution& mu, std::size_t n, const ExactOptions& options) {
  return range_law<double>(mu, n, options, true);
}

ExactLaw exact_law_range_endpoint(const StepDistribution& mu, std::size_t n, const ExactOptions& options) {
  return range_law<Rational>(mu, n, options, true);
}

Law law_range(const StepDistribution& mu, std::size_t n, const ExactOptions& options) {
  return range_law<double>(mu, n, options, false);
}

Law law_trace(const StepDistribution& mu, std::size_t n, bool with_endpoint, const ExactOptions& options) {
  return trace_law<double>(mu, n, with_endpoint, options);
}

ExactLaw exact_law_trace(const StepDistribution& mu, std::size_t n, bool with_endpoint, const ExactOptions& options) {
  return trace_law<Rational>(mu, n, with_endpoint, options);
}

std::vector<RangeOutcome> range_outcomes(const StepDistribution& mu, std::size_t n, const ExactOptions& options) {
  std::vector<RangeOutcome> out;
  for (auto& a : range_atoms<double>(mu, n, options)) out.push_back({std::move(a.range), a.endpoint, a.p});
  return out;
}

bool interval_dp_applies(const StepDistribution& mu) {
  if (mu.group().kind() != GroupKind::IntegerLine) return false;
  return std::all_of(mu.atoms().begin(), mu.atoms().end(),
                     [](const Atom& a) { return a.element.value() >= -1 && a.element.value() <= 1; });
}

double EntropySequence::h_proxy() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < h_rs.size(); ++n) best = std::min(best, h_rs[n] / static_cast<double>(n));
  return best;
}

EntropySequence entropy_sequence(const StepDistribution& mu, std::size_t n_max, const SequenceOptions& options) {
  if (options.rational) return sequence_impl<Rational>(mu, n_max, options);
  return sequence_impl<double>(mu, n_max, options);
}

std::vector<SubadditivityViolation> check_subadditivity(const EntropySequence& seq, double tolerance) {
  std::vector<SubadditivityViolation> out;
  auto scan = [&](const std::vector<double>& h, const char* track) {
    for (std::size_t n = 0; n < h.size(); ++n) {
      for (std::size_t m = n; n + m < h.size(); ++m) {
        const double lhs = h[n + m];
        const double rhs = h[n] + h[m];
        if (lhs > rhs + tolerance) out.push_back({track, n, m, lhs, rhs});
      }
    }
  };
  scan(seq.h_rs, "RS");
  scan(seq.h_gs, "GS");
  return out;
}

BoundPair lemma31_bound(std::span<const double> p, double alpha) {
  if (!(alpha >= 1.0)) throw ValidationError("alpha must be at least 1");
  if (p.empty()) throw ValidationError("probability vector is empty");
  NeumaierSum total;
  NeumaierSum lhs;
  for (double x : p) {
    if (!(x > 0.0) || x > 1.0) throw ValidationError("probabilities must lie in (0, 1]");
    total.add(x);
    lhs.add(x * std::pow(-std::log(x), alpha));
  }
  if (std::abs(total.value() - 1.0) > 1e-9) throw ValidationError("probabilities must sum to 1");
  const double n = static_cast<double>(p.size());
  return {lhs.value(), std::pow(std::max(alpha, std::log(n)), alpha) + std::pow(alpha - 1.0, alpha)};
}

namespace {

// Per-layer sums for the conditional law of S_n given R_n. Groups must arrive
// whole; a layer may arrive in several pieces.
class ConditionalAccumulator {
 public:
  explicit ConditionalAccumulator(std::size_t n_max) : h_(n_max + 1), moment_(n_max + 1, 0.0) {}

  void add_group(std::size_t layer, std::vector<double>& probs) {
    NeumaierSum mass;
    for (double p : probs) mass.add(p);
    const double pa = mass.value();
    std::sort(probs.begin(), probs.end());
    NeumaierSum ha;
    NeumaierSum moment;
    for (double p : probs) {
      const double c = p / pa;
      const double l = std::log(c);
      ha.add(-c * l);
      moment.add(c * l * l);
    }
    h_[layer].add(pa * ha.value());
    moment_[layer] = std::max(moment_[layer], moment.value());
  }

  // items: (range key, probability) of one piece of a layer.
  template <class Key>
  void add_piece(std::size_t layer, std::vector<std::pair<Key, double>>& items) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> probs;
    for (std::size_t i = 0; i < items.size();) {
      probs.clear();
      std::size_t j = i;
      for (; j < items.size() && items[j].first == items[i].first; ++j) probs.push_back(items[j].second);
      add_group(layer, probs);
      i = j;
    }
  }

  std::vector<ConditionalEndpointReport> reports() const {
    std::vector<ConditionalEndpointReport> out;
    for (std::size_t n = 0; n < h_.size(); ++n) {
      ConditionalEndpointReport r;
      r.n = n;
      const double ln_n1 = std::log(static_cast<double>(n) + 1.0);
      r.entropy_bound = ln_n1;
      r.ln2_bound = ln_n1 * ln_n1 + 5.0;
      r.h_endpoint_given_range = std::max(0.0, h_[n].value());
      r.max_ln2_moment = moment_[n];
      r.ok = r.h_endpoint_given_range <= r.entropy_bound + 1e-12 && r.max_ln2_moment <= r.ln2_bound;
      out.push_back(r);
    }
    return out;
  }

 private:
  std::vector<NeumaierSum> h_;
  std::vector<double> moment_;
};

}  // namespace

std::vector<ConditionalEndpointReport> conditional_endpoint_sequence(const StepDistribution& mu, std::size_t n_max,
                                                                     const ExactOptions& options) {
  ConditionalAccumulator acc(n_max);
  if (options.interval_dp && interval_dp_applies(mu)) {
    interval_dp<double>(mu, n_max, options, [&](std::size_t layer, const IntervalLayer<double>& t) {
      std::vector<std::pair<std::uint64_t, double>> items;
      items.reserve(t.size());
      for (const auto& [key, p] : t.items()) {
        const auto s = unpack_interval(key);
        items.emplace_back(pack_interval(s.lo, s.hi, 0), p);
      }
      acc.add_piece(layer, items);
    });
  } else {
    Interner interner(mu);
    // the final layer is partitioned on the range part, so groups stay whole
    range_dp<double>(mu, n_max, options, interner, true, [&](std::size_t layer, const RangeLayer<double>& t) {
      std::vector<std::pair<std::u32string_view, double>> items;
      items.reserve(t.size());
      for (const auto& [key, p] : t.items()) items.emplace_back(std::u32string_view(key.data(), key.size() - 1), p);
      acc.add_piece(layer, items);
    });
  }
  return acc.reports();
}

ConditionalEndpointReport conditional_endpoint_diagnostics(const StepDistribution& mu, std::size_t n,
                                                           const ExactOptions& options) {
  return conditional_endpoint_sequence(mu, n, options).back();
}

namespace {

double boundary_direction_probability(const StepDistribution& mu, const GroupElement& g) {
  const auto& group = mu.group();
  group.validate(g);
  if (group.is_identity(g)) throw ValidationError("boundary direction must differ from e");
  if (!mu.slot_of(g)) throw ValidationError("boundary direction must be a support point of mu");
  const double mg = mu.probability(g);
  if (!(mg < 1.0)) throw ValidationError("boundary bound needs mu(g) < 1");
  return mg;
}

}  // namespace

BoundaryReport boundary_report(const StepDistribution& mu, std::size_t n, const GroupElement& g,
                               double expected_boundary, double h_range) {
  const double mg = boundary_direction_probability(mu, g);
  BoundaryReport r;
  r.n = n;
  r.h_range = h_range;
  r.expected_boundary = expected_boundary;
  r.bound = -(r.expected_boundary - 1.0) * std::log1p(-mg);
  r.ok = r.h_range + 1e-12 >= r.bound;
  return r;
}

BoundaryReport boundary_lower_bound(const StepDistribution& mu, std::size_t n, const GroupElement& g,
                                    const ExactOptions& options) {
  boundary_direction_probability(mu, g);
  const auto& group = mu.group();
  NeumaierSum expected;
  std::map<std::string, double> marginal;
  for (const auto& a : range_outcomes(mu, n, options)) {
    std::size_t count = 0;
    for (const auto& x : a.range) {
      if (!std::binary_search(a.range.begin(), a.range.end(), group.mul(x, g))) ++count;
    }
    expected.add(a.probability * static_cast<double>(count));
    marginal[range_key(a.range)] += a.probability;
  }
  std::vector<double> probs;
  for (const auto& [k, p] : marginal) probs.push_back(p);
  return boundary_report(mu, n, g, expected.value(), entropy_of(std::move(probs)));
}

std::vector<std::vector<double>> expected_boundary_by_paths(const StepDistribution& mu, std::size_t n_max,
                                                            std::span<const GroupElement> directions,
                                                            const ExactOptions& options) {
  for (const auto& g : directions) boundary_direction_probability(mu, g);
  const double paths = std::pow(static_cast<double>(mu.size()), static_cast<double>(n_max));
  if (paths > static_cast<double>(options.path_cap)) throw ResourceError("boundary enumeration exceeds path_cap");
  const auto& group = mu.group();
  const std::size_t dirs = directions.size();
  std::vector<GroupElement> inverses;
  for (const auto& g : directions) inverses.push_back(group.inverse(g));

  // Visit counts of the current path prefix; boundary[j] counts x in R with
  // x g_j not in R.
  absl::flat_hash_map<GroupElement, std::uint32_t, GroupElementHash> visits;
  std::vector<std::int64_t> boundary(dirs, 0);
  auto in_range = [&](const GroupElement& x) { return visits.contains(x); };
  auto enter = [&](const GroupElement& y) {
    if (visits[y]++ > 0) return;
    for (std::size_t j = 0; j < dirs; ++j) {
      if (!in_range(group.mul(y, directions[j]))) ++boundary[j];
      if (in_range(group.mul(y, inverses[j]))) --boundary[j];
    }
  };
  auto leave = [&](const GroupElement& y) {
    auto it = visits.find(y);
    if (--it->second > 0) return;
    visits.erase(it);
    for (std::size_t j = 0; j < dirs; ++j) {
      if (!in_range(group.mul(y, directions[j]))) --boundary[j];
      if (in_range(group.mul(y, inverses[j]))) ++boundary[j];
    }
  };

  std::vector<std::vector<NeumaierSum>> sums(n_max + 1, std::vector<NeumaierSum>(dirs));
  auto record = [&](std::size_t depth, double w) {
    for (std::size_t j = 0; j < dirs; ++j) sums[depth][j].add(w * static_cast<double>(boundary[j]));
  };
  std::vector<GroupElement> position(n_max + 1);
  std::vector<double> weight(n_max + 1, 1.0);
  std::vector<std::size_t> slot(n_max + 1, 0);
  position[0] = group.identity();
  enter(position[0]);
  record(0, 1.0);
  std::size_t depth = 0;
  while (n_max > 0) {
    if (slot[depth] == mu.size()) {
      if (depth == 0) break;
      leave(position[depth]);
      --depth;
      ++slot[depth];
      continue;
    }
    const auto& atom = mu.atoms()[slot[depth]];
    position[depth + 1] = group.mul(position[depth], atom.element);
    weight[depth + 1] = weight[depth] * atom.probability;
    enter(position[depth + 1]);
    record(depth + 1, weight[depth + 1]);
    if (depth + 1 == n_max) {
      leave(position[n_max]);
      ++slot[depth];
    } else {
      ++depth;
      slot[depth] = 0;
    }
  }
  std::vector<std::vector<double>> out(n_max + 1, std::vector<double>(dirs));
  for (std::size_t n = 0; n <= n_max; ++n)
    for (std::size_t j = 0; j < dirs; ++j) out[n][j] = sums[n][j].value();
  return out;
}

AepSummary aep_samples(const Group& group, const Law& law, std::size_t n, std::span<const Trajectory> trajectories) {
  return aep_impl(group, law, n, trajectories);
}

AepSummary aep_samples(const Group& group, const ExactLaw& law, std::size_t n,
                       std::span<const Trajectory> trajectories) {
  return aep_impl(group, law, n, trajectories);
}

double reversal_law_check(const StepDistribution& mu, std::size_t n, const ExactOptions& options) {
  const auto& group = mu.group();
  std::map<std::string, double> shifted;
  for (const auto& a : range_outcomes(mu, n, options)) {
    const auto inv = group.inverse(a.endpoint);
    std::vector<GroupElement> set;
    set.reserve(a.range.size());
    for (const auto& x : a.range) set.push_back(group.mul(inv, x));
    std::sort(set.begin(), set.end());
    shifted[range_key(set)] += a.probability;
  }
  std::vector<Law::Entry> entries(shifted.begin(), shifted.end());
  return total_variation(Law(std::move(entries)), law_range(reversed_measure(mu), n, options));
}

void write_law_csv(std::ostream& out, const Law& law) {
  out << "key_hex,probability\n";
  static constexpr char kHex[] = "0123456789abcdef";
  for (const auto& [key, p] : law.entries()) {
    for (unsigned char c : key) out << kHex[c >> 4] << kHex[c & 15];
    out << ',' << std::setprecision(17) << p << '\n';
  }
}

void write_entropy_csv(std::ostream& out, const EntropySequence& seq) {
  out << "n,H_R,H_RS,H_G,H_GS\n";
  out << std::setprecision(17);
  for (std::size_t n = 0; n < seq.h_rs.size(); ++n) {
    out << n << ',' << seq.h_r[n] << ',' << seq.h_rs[n] << ',';
    if (n < seq.h_g.size()) {
      out << seq.h_g[n] << ',' << seq.h_gs[n];
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace rangewalk
