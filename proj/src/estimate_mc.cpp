#include "rangewalk/estimate_mc.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "rangewalk/detail/multinomial.hpp"
#include "rangewalk/detail/neumaier.hpp"
#include "rangewalk/error.hpp"
#include "rangewalk/walk.hpp"

namespace rangewalk {

using detail::multinomial;
using detail::NeumaierSum;

std::string_view to_string(EntropyMethod m) {
  return m == EntropyMethod::PlugIn ? "plug-in" : "miller-madow";
}

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kMinJump = 32;

void check_layout(std::uint64_t samples, const McOptions& options) {
  if (samples == 0) throw ValidationError("samples must be at least 1");
  if (options.streams == 0) throw ValidationError("streams must be at least 1");
}

RngStreamSpec stream_of(const McOptions& options, std::size_t j) { return {options.seed, j}; }

// remaining * step >= distance, without overflow.
bool within(std::uint64_t distance, std::uint64_t remaining, std::uint64_t step) {
  return static_cast<unsigned __int128>(remaining) * step >= distance;
}

// Steps that surely miss a target at `distance` when one step moves at most
// `reach` toward it: the first possible hit is at step ceil(distance / reach).
std::uint64_t steps_needed(std::uint64_t distance, std::uint64_t reach) {
  if (distance == 0) return 0;
  if (reach == 0) return kNever;
  return (distance + reach - 1) / reach - 1;
}

// Walkers over one group kind. reachable(r) == false certifies that no target
// can be hit in the next r steps; true is always a safe answer.

class LineWalker {
 public:
  LineWalker(const StepDistribution& mu, std::span<const GroupElement> targets) {
    for (const auto& a : mu.atoms()) {
      const std::int64_t s = a.element.value();
      steps_.push_back(s);
      up_ = std::max<std::uint64_t>(up_, s > 0 ? static_cast<std::uint64_t>(s) : 0);
      down_ = std::max<std::uint64_t>(down_, s < 0 ? static_cast<std::uint64_t>(-s) : 0);
    }
    for (const auto& t : targets) targets_.push_back(t.value());
    for (const auto& a : mu.atoms()) probs_.push_back(a.probability);
  }
  static constexpr bool kCanJump = true;
  void reset() { pos_ = 0; }
  std::uint64_t safe_steps() const {
    std::uint64_t safe = kNever;
    for (std::int64_t t : targets_) {
      const std::int64_t d = t - pos_;
      safe = std::min(safe, steps_needed(d >= 0 ? static_cast<std::uint64_t>(d) : static_cast<std::uint64_t>(-d),
                                         d >= 0 ? up_ : down_));
    }
    return safe;
  }
  void jump(std::uint64_t m, CounterRng& rng) {
    multinomial(probs_, m, rng, counts_);
    for (std::size_t i = 0; i < steps_.size(); ++i) pos_ += static_cast<std::int64_t>(counts_[i]) * steps_[i];
  }
  void step(std::size_t slot) { pos_ += steps_[slot]; }
  bool on_target() const { return std::find(targets_.begin(), targets_.end(), pos_) != targets_.end(); }
  bool reachable(std::uint64_t remaining) const {
    for (std::int64_t t : targets_) {
      const std::int64_t d = t - pos_;
      if (d >= 0 ? within(static_cast<std::uint64_t>(d), remaining, up_)
                 : within(static_cast<std::uint64_t>(-d), remaining, down_))
        return true;
    }
    return false;
  }

 private:
  std::vector<std::int64_t> steps_;
  std::vector<double> probs_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::int64_t> targets_;
  std::uint64_t up_ = 0;
  std::uint64_t down_ = 0;
  std::int64_t pos_ = 0;
};

class LatticeWalker {
 public:
  LatticeWalker(const StepDistribution& mu, std::span<const GroupElement> targets)
      : d_(mu.descriptor().parameter), up_(d_, 0), down_(d_, 0), pos_(d_, 0) {
    for (const auto& a : mu.atoms()) {
      for (std::size_t j = 0; j < d_; ++j) {
        const std::int64_t s = a.element.payload()[j];
        steps_.push_back(s);
        if (s > 0) up_[j] = std::max(up_[j], static_cast<std::uint64_t>(s));
        if (s < 0) down_[j] = std::max(down_[j], static_cast<std::uint64_t>(-s));
      }
    }
    for (const auto& t : targets) targets_.insert(targets_.end(), t.payload().begin(), t.payload().end());
    for (const auto& a : mu.atoms()) probs_.push_back(a.probability);
  }
  static constexpr bool kCanJump = true;
  void reset() { std::fill(pos_.begin(), pos_.end(), 0); }
  std::uint64_t safe_steps() const {
    std::uint64_t safe = kNever;
    for (std::size_t t = 0; t < targets_.size(); t += d_) {
      std::uint64_t need = 0;  // steps needed for the slowest coordinate
      for (std::size_t j = 0; j < d_; ++j) {
        const std::int64_t d = targets_[t + j] - pos_[j];
        need = std::max(need, steps_needed(d >= 0 ? static_cast<std::uint64_t>(d) : static_cast<std::uint64_t>(-d),
                                           d >= 0 ? up_[j] : down_[j]));
      }
      safe = std::min(safe, need);
    }
    return safe;
  }
  void jump(std::uint64_t m, CounterRng& rng) {
    multinomial(probs_, m, rng, counts_);
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      for (std::size_t j = 0; j < d_; ++j) pos_[j] += static_cast<std::int64_t>(counts_[i]) * steps_[i * d_ + j];
    }
  }
  void step(std::size_t slot) {
    const std::int64_t* s = steps_.data() + slot * d_;
    for (std::size_t j = 0; j < d_; ++j) pos_[j] += s[j];
  }
  bool on_target() const {
    for (std::size_t t = 0; t < targets_.size(); t += d_) {
      if (std::equal(pos_.begin(), pos_.end(), targets_.begin() + static_cast<std::ptrdiff_t>(t))) return true;
    }
    return false;
  }
  bool reachable(std::uint64_t remaining) const {
    for (std::size_t t = 0; t < targets_.size(); t += d_) {
      bool ok = true;
      for (std::size_t j = 0; j < d_ && ok; ++j) {
        const std::int64_t d = targets_[t + j] - pos_[j];
        ok = d >= 0 ? within(static_cast<std::uint64_t>(d), remaining, up_[j])
                    : within(static_cast<std::uint64_t>(-d), remaining, down_[j]);
      }
      if (ok) return true;
    }
    return false;
  }

 private:
  std::size_t d_;
  std::vector<std::int64_t> steps_;  // row-major, d_ per slot
  std::vector<double> probs_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> up_, down_;
  std::vector<std::int64_t> targets_;
  std::vector<std::int64_t> pos_;
};

class FreeWalker {
 public:
  FreeWalker(const StepDistribution& mu, std::span<const GroupElement> targets) {
    for (const auto& a : mu.atoms()) max_len_ = std::max<std::uint64_t>(max_len_, a.element.payload().size());
    letters_.assign(mu.size() * max_len_, 0);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const auto& w = mu.atoms()[i].element.payload();
      lengths_.push_back(static_cast<std::uint32_t>(w.size()));
      std::copy(w.begin(), w.end(), letters_.begin() + static_cast<std::ptrdiff_t>(i * max_len_));
    }
    for (const auto& t : targets) targets_.emplace_back(t.payload().begin(), t.payload().end());
    // Slot 0 is a sentinel below the bottom of the word; letters are never 0.
    buffer_.assign(1024, 0);
  }
  static constexpr bool kCanJump = false;
  void reset() { size_ = 0; }
  void step(std::size_t slot) {
    if (size_ + max_len_ + 2 > buffer_.size()) buffer_.resize(2 * buffer_.size());
    const std::int64_t* w = letters_.data() + slot * max_len_;
    std::int64_t* top = buffer_.data() + 1;
    for (std::uint32_t k = 0; k < lengths_[slot]; ++k) {
      const bool cancel = top[static_cast<std::ptrdiff_t>(size_) - 1] == -w[k];
      top[size_] = w[k];
      size_ = cancel ? size_ - 1 : size_ + 1;
    }
  }
  bool on_target() const {
    const std::int64_t* top = buffer_.data() + 1;
    for (const auto& t : targets_) {
      if (t.size() == size_ && std::equal(t.begin(), t.end(), top)) return true;
    }
    return false;
  }
  bool reachable(std::uint64_t remaining) const {
    const std::int64_t* top = buffer_.data() + 1;
    for (const auto& t : targets_) {
      const auto common = static_cast<std::size_t>(
          std::mismatch(top, top + size_, t.begin(), t.end()).first - top);
      if (within(size_ + t.size() - 2 * common, remaining, max_len_)) return true;
    }
    return false;
  }

 private:
  std::vector<std::int64_t> letters_;  // max_len_ per slot
  std::vector<std::uint32_t> lengths_;
  std::vector<std::vector<std::int64_t>> targets_;
  std::uint64_t max_len_ = 0;
  std::vector<std::int64_t> buffer_;
  std::size_t size_ = 0;
};

// Any group; no pruning.
class GenericWalker {
 public:
  GenericWalker(const StepDistribution& mu, std::span<const GroupElement> targets)
      : group_(&mu.group()), targets_(targets.begin(), targets.end()), pos_(group_->identity()) {
    for (const auto& a : mu.atoms()) steps_.push_back(a.element);
  }
  static constexpr bool kCanJump = false;
  void reset() { pos_ = group_->identity(); }
  void step(std::size_t slot) { group_->mul_in_place(pos_, steps_[slot]); }
  bool on_target() const { return std::find(targets_.begin(), targets_.end(), pos_) != targets_.end(); }
  bool reachable(std::uint64_t) const { return true; }

 private:
  const Group* group_;
  std::vector<GroupElement> steps_;
  std::vector<GroupElement> targets_;
  GroupElement pos_;
};

template <class F>
void with_walker(const StepDistribution& mu, std::span<const GroupElement> targets, F&& f) {
  switch (mu.descriptor().kind) {
    case GroupKind::IntegerLine: {
      LineWalker w(mu, targets);
      f(w);
      return;
    }
    case GroupKind::IntegerLattice: {
      LatticeWalker w(mu, targets);
      f(w);
      return;
    }
    case GroupKind::FreeGroup: {
      FreeWalker w(mu, targets);
      f(w);
      return;
    }
    default: {
      GenericWalker w(mu, targets);
      f(w);
      return;
    }
  }
}

// First k in [1, horizon] with S_k on a target, else kNever.
template <class W>
std::uint64_t first_hit(W& w, const StepSampler& sampler, CounterRng& rng, std::uint64_t horizon) {
  w.reset();
  std::uint64_t k = 0;
  while (k < horizon) {
    if constexpr (W::kCanJump) {
      // Far from every target the path in between is irrelevant; only the
      // position after the skipped steps is drawn.
      const std::uint64_t safe = w.safe_steps();
      if (safe >= kMinJump) {
        const std::uint64_t m = std::min(safe, horizon - k);
        w.jump(m, rng);
        k += m;
        continue;
      }
    }
    w.step(sampler.slot(rng));
    ++k;
    if (w.on_target()) return k;
    if ((k & 15) == 0 && !w.reachable(horizon - k)) return kNever;
  }
  return kNever;
}

HittingEstimate make_hitting(std::uint64_t survivors, std::uint64_t samples, std::uint64_t horizon) {
  HittingEstimate h;
  h.samples = samples;
  h.horizon = horizon;
  h.estimate = static_cast<double>(survivors) / static_cast<double>(samples);
  h.ci_half_width = 1.96 * std::sqrt(h.estimate * (1.0 - h.estimate) / static_cast<double>(samples));
  return h;
}

// |R_n| of one sample; slot counts are added into `counts`.
class RangeSampler {
 public:
  explicit RangeSampler(const StepDistribution& mu) : mu_(&mu) {
    line_ = mu.descriptor().kind == GroupKind::IntegerLine;
    nearest_ = line_ && interval_dp_applies(mu);
    for (const auto& a : mu.atoms()) {
      steps_.push_back(a.element);
      if (line_) line_steps_.push_back(a.element.value());
    }
  }

  std::uint64_t sample(const StepSampler& sampler, CounterRng& rng, std::size_t n, std::vector<std::uint64_t>& counts) {
    if (nearest_) {
      std::int64_t pos = 0, lo = 0, hi = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t s = sampler.slot(rng);
        ++counts[s];
        pos += line_steps_[s];
        lo = std::min(lo, pos);
        hi = std::max(hi, pos);
      }
      return static_cast<std::uint64_t>(hi - lo + 1);
    }
    if (line_) {
      ints_.clear();
      std::int64_t pos = 0;
      ints_.insert(pos);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t s = sampler.slot(rng);
        ++counts[s];
        pos += line_steps_[s];
        ints_.insert(pos);
      }
      return ints_.size();
    }
    elements_.clear();
    const Group& g = mu_->group();
    GroupElement pos = g.identity();
    elements_.insert(pos);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t s = sampler.slot(rng);
      ++counts[s];
      g.mul_in_place(pos, steps_[s]);
      elements_.insert(pos);
    }
    return elements_.size();
  }

 private:
  const StepDistribution* mu_;
  bool line_ = false;
  bool nearest_ = false;
  std::vector<GroupElement> steps_;
  std::vector<std::int64_t> line_steps_;
  absl::flat_hash_set<std::int64_t> ints_;
  absl::flat_hash_set<GroupElement, GroupElementHash> elements_;
};

MeanEstimate mean_from(const NeumaierSum& sum, const NeumaierSum& squares, std::uint64_t samples) {
  MeanEstimate m;
  m.samples = samples;
  const double n = static_cast<double>(samples);
  m.mean = sum.value() / n;
  if (samples > 1) {
    const double var = std::max(0.0, (squares.value() - n * m.mean * m.mean) / (n - 1.0));
    m.stderr_ = std::sqrt(var / n);
  }
  m.ci_half_width = 1.96 * m.stderr_;
  return m;
}

const GroupElement& support_point(const StepDistribution& mu, const GroupElement& g, const char* what) {
  mu.group().validate(g);
  const auto slot = mu.slot_of(g);
  if (!slot) throw ValidationError(std::string(what) + " must be a support point");
  const double p = mu.atoms()[*slot].probability;
  if (!(p > 0.0 && p < 1.0)) throw ValidationError(std::string(what) + " must have probability in (0, 1)");
  return mu.atoms()[*slot].element;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entropy from counts

double plug_in_entropy(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  std::vector<double> p;
  p.reserve(counts.size());
  for (auto c : counts) {
    if (c > 0) p.push_back(static_cast<double>(c) / static_cast<double>(total));
  }
  return entropy_of(std::move(p));
}

double miller_madow_entropy(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0, distinct = 0;
  for (auto c : counts) {
    total += c;
    distinct += c > 0;
  }
  if (total == 0) return 0.0;
  return plug_in_entropy(counts) + static_cast<double>(distinct - 1) / (2.0 * static_cast<double>(total));
}

EntropyEstimate mc_entropy(const StepDistribution& mu, std::size_t n, std::uint64_t samples, Outcome target,
                           const McOptions& options, EntropyMethod method) {
  check_layout(samples, options);
  const Group& group = mu.group();
  const StepSampler sampler(mu);
  using Counts = absl::flat_hash_map<std::string, std::uint64_t>;
  std::vector<Counts> blocks(options.streams);
  parallel_for(options.streams, resolve_workers(options.workers), [&](std::size_t j) {
    CounterRng rng(stream_of(options, j));
    Counts& counts = blocks[j];
    const std::uint64_t m = block_size(samples, options.streams, j);
    for (std::uint64_t s = 0; s < m; ++s) {
      IncrementalWalk walk(group);
      for (std::size_t k = 0; k < n; ++k) walk.step(mu.atoms()[sampler.slot(rng)].element);
      ++counts[outcome_key(group, walk, target)];
    }
  });

  Counts total;
  for (const auto& b : blocks) {
    for (const auto& [key, c] : b) total[key] += c;
  }
  std::vector<std::uint64_t> counts;
  counts.reserve(total.size());
  for (const auto& [key, c] : total) counts.push_back(c);
  std::sort(counts.begin(), counts.end());

  EntropyEstimate out;
  out.samples = samples;
  out.distinct = counts.size();
  out.method = method;
  out.plug_in = plug_in_entropy(counts);
  out.miller_madow = miller_madow_entropy(counts);
  out.value = method == EntropyMethod::PlugIn ? out.plug_in : out.miller_madow;

  // Delete-one-block jackknife: H = ln N - (1/N) sum c ln c, updated per block.
  auto clnc = [](std::uint64_t c) { return c == 0 ? 0.0 : static_cast<double>(c) * std::log(static_cast<double>(c)); };
  NeumaierSum full;
  for (auto c : counts) full.add(clnc(c));
  std::vector<double> leave_out;
  for (const auto& b : blocks) {
    std::uint64_t nb = 0;
    for (const auto& [key, c] : b) nb += c;
    if (nb == 0 || nb == samples) continue;
    NeumaierSum s = full;
    std::uint64_t vanished = 0;
    for (const auto& [key, c] : b) {
      const std::uint64_t all = total.find(key)->second;
      s.add(-clnc(all));
      s.add(clnc(all - c));
      vanished += all == c;
    }
    const double rest = static_cast<double>(samples - nb);
    double h = std::log(rest) - s.value() / rest;
    if (method == EntropyMethod::MillerMadow) {
      h += static_cast<double>(counts.size() - vanished - 1) / (2.0 * rest);
    }
    leave_out.push_back(h);
  }
  if (leave_out.size() >= 2) {
    const double g = static_cast<double>(leave_out.size());
    NeumaierSum mean;
    for (double h : leave_out) mean.add(h);
    const double m = mean.value() / g;
    NeumaierSum sq;
    for (double h : leave_out) sq.add((h - m) * (h - m));
    out.stderr_ = std::sqrt((g - 1.0) / g * sq.value());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hitting and escape

std::vector<HittingEstimate> avoidance_tail(const StepDistribution& mu, std::span<const GroupElement> targets,
                                            std::span<const std::uint64_t> horizons, std::uint64_t samples,
                                            const McOptions& options) {
  check_layout(samples, options);
  if (targets.empty()) throw ValidationError("at least one target is required");
  if (horizons.empty()) throw ValidationError("at least one horizon is required");
  for (const auto& t : targets) mu.group().validate(t);
  for (auto h : horizons) {
    if (h == 0) throw ValidationError("horizon must be at least 1");
  }
  const std::uint64_t max_h = *std::max_element(horizons.begin(), horizons.end());
  const StepSampler sampler(mu);

  // hits[j][i]: samples of block j that hit a target by horizons[i].
  std::vector<std::vector<std::uint64_t>> hits(options.streams, std::vector<std::uint64_t>(horizons.size(), 0));
  parallel_for(options.streams, resolve_workers(options.workers), [&](std::size_t j) {
    CounterRng rng(stream_of(options, j));
    const std::uint64_t m = block_size(samples, options.streams, j);
    with_walker(mu, targets, [&](auto& walker) {
      for (std::uint64_t s = 0; s < m; ++s) {
        const std::uint64_t tau = first_hit(walker, sampler, rng, max_h);
        if (tau == kNever) continue;
        for (std::size_t i = 0; i < horizons.size(); ++i) hits[j][i] += tau <= horizons[i];
      }
    });
  });

  std::vector<HittingEstimate> out;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    std::uint64_t hit = 0;
    for (const auto& h : hits) hit += h[i];
    out.push_back(make_hitting(samples - hit, samples, horizons[i]));
  }
  return out;
}

std::vector<HittingEstimate> escape_rate(const StepDistribution& mu, std::span<const std::uint64_t> horizons,
                                         std::uint64_t samples, const McOptions& options) {
  const GroupElement e = mu.group().identity();
  return avoidance_tail(mu, std::span(&e, 1), horizons, samples, options);
}

HittingEstimate escape_rate(const StepDistribution& mu, std::uint64_t horizon, std::uint64_t samples,
                            const McOptions& options) {
  return escape_rate(mu, std::span(&horizon, 1), samples, options).front();
}

std::vector<HittingEstimate> hitting_tail(const StepDistribution& mu, const GroupElement& x,
                                          std::span<const std::uint64_t> horizons, std::uint64_t samples,
                                          const McOptions& options) {
  return avoidance_tail(mu, std::span(&x, 1), horizons, samples, options);
}

HittingEstimate hitting_tail(const StepDistribution& mu, const GroupElement& x, std::uint64_t horizon,
                             std::uint64_t samples, const McOptions& options) {
  return hitting_tail(mu, x, std::span(&horizon, 1), samples, options).front();
}

// ---------------------------------------------------------------------------
// Range statistics

MeanEstimate mean_range_rate(const StepDistribution& mu, std::size_t n, std::uint64_t samples,
                             const McOptions& options) {
  check_layout(samples, options);
  if (n == 0) throw ValidationError("n must be at least 1");
  const StepSampler sampler(mu);
  // Integer sums keep the mean exact whenever it is representable.
  std::vector<std::uint64_t> sums(options.streams, 0);
  std::vector<unsigned __int128> squares(options.streams, 0);
  parallel_for(options.streams, resolve_workers(options.workers), [&](std::size_t j) {
    CounterRng rng(stream_of(options, j));
    RangeSampler ranges(mu);
    std::vector<std::uint64_t> counts(mu.size(), 0);
    const std::uint64_t m = block_size(samples, options.streams, j);
    for (std::uint64_t s = 0; s < m; ++s) {
      const std::uint64_t r = ranges.sample(sampler, rng, n, counts);
      sums[j] += r;
      squares[j] += static_cast<unsigned __int128>(r) * r;
    }
  });
  std::uint64_t sum = 0;
  unsigned __int128 sq = 0;
  for (std::size_t j = 0; j < options.streams; ++j) {
    sum += sums[j];
    sq += squares[j];
  }
  MeanEstimate out;
  out.samples = samples;
  const double ns = static_cast<double>(samples);
  const double nn = static_cast<double>(n);
  out.mean = static_cast<double>(sum) / (ns * nn);
  if (samples > 1) {
    const double mean_r = static_cast<double>(sum) / ns;
    const double var = std::max(0.0, (static_cast<double>(sq) - ns * mean_r * mean_r) / (ns - 1.0));
    out.stderr_ = std::sqrt(var / ns) / nn;
  }
  out.ci_half_width = 1.96 * out.stderr_;
  return out;
}

double y_term(std::uint64_t o, std::uint64_t range_size) {
  if (o == 0 || range_size <= 1) return 0.0;
  const double a = static_cast<double>(o);
  const double m = static_cast<double>(range_size - 1);
  return a * std::log1p(m / a) + m * std::log1p(a / m);
}

MeanEstimate trace_upper_diagnostic(const StepDistribution& mu, std::size_t n, std::uint64_t samples,
                                    const McOptions& options) {
  check_layout(samples, options);
  if (n == 0) throw ValidationError("n must be at least 1");
  const StepSampler sampler(mu);
  std::vector<NeumaierSum> sums(options.streams), squares(options.streams);
  parallel_for(options.streams, resolve_workers(options.workers), [&](std::size_t j) {
    CounterRng rng(stream_of(options, j));
    RangeSampler ranges(mu);
    std::vector<std::uint64_t> counts(mu.size());
    const std::uint64_t m = block_size(samples, options.streams, j);
    for (std::uint64_t s = 0; s < m; ++s) {
      std::fill(counts.begin(), counts.end(), 0);
      const std::uint64_t r = ranges.sample(sampler, rng, n, counts);
      double y = 0.0;
      for (auto o : counts) y += y_term(o, r);
      y /= static_cast<double>(n);
      sums[j].add(y);
      squares[j].add(y * y);
    }
  });
  NeumaierSum sum, sq;
  for (std::size_t j = 0; j < options.streams; ++j) {
    sum.add(sums[j].value());
    sq.add(squares[j].value());
  }
  return mean_from(sum, sq, samples);
}

// ---------------------------------------------------------------------------
// Lower bounds

TraceLowerBound h_gamma_lower_bound(const StepDistribution& mu, const GroupElement& a, std::uint64_t horizon,
                                    std::uint64_t samples, const McOptions& options, const ExactFactors& exact) {
  const GroupElement& atom = support_point(mu, a, "a");
  const double pa = mu.probability(atom);
  TraceLowerBound out;
  out.horizon = horizon;
  out.entropy_factor = -pa * std::log(pa);
  double tail_ci = 0.0, escape_ci = 0.0;
  if (exact.tail) {
    out.tail = *exact.tail;
  } else {
    const auto h = hitting_tail(mu, mu.group().inverse(atom), horizon, samples, options);
    out.tail = h.estimate;
    tail_ci = h.ci_half_width;
    out.truncated = true;
  }
  if (exact.escape) {
    out.escape = *exact.escape;
  } else {
    McOptions second = options;
    second.seed = options.seed + 1;
    const auto h = escape_rate(mu, horizon, samples, second);
    out.escape = h.estimate;
    escape_ci = h.ci_half_width;
    out.truncated = true;
  }
  out.c = out.entropy_factor * out.tail * out.escape;
  out.ci_half_width = out.entropy_factor * std::hypot(out.escape * tail_ci, out.tail * escape_ci);
  return out;
}

RangeLowerDiagnostic h_r_lower_bound_diag(const StepDistribution& mu, const GroupElement& g, std::uint64_t horizon,
                                          std::uint64_t samples, const McOptions& options) {
  const GroupElement& atom = support_point(mu, g, "g");
  const double pg = mu.probability(atom);
  RangeLowerDiagnostic out;
  out.horizon = horizon;
  const auto tail = hitting_tail(mu, atom, horizon, samples, options);
  const StepDistribution reversed = reversed_measure(mu);
  const GroupElement targets[] = {mu.group().identity(), atom};
  McOptions second = options;
  second.seed = options.seed + 1;
  const auto avoid = avoidance_tail(reversed, targets, std::span(&horizon, 1), samples, second).front();
  out.tail = tail.estimate;
  out.reversed_avoid = avoid.estimate;
  const double factor = -std::log1p(-pg);
  out.value = factor * out.tail * out.reversed_avoid;
  out.ci_half_width = factor * std::hypot(out.reversed_avoid * tail.ci_half_width, out.tail * avoid.ci_half_width);
  return out;
}

// ---------------------------------------------------------------------------
// Binomial marginal

BinomialFit binomial_marginal_check(const StepDistribution& mu, std::size_t n, std::uint64_t samples,
                                    std::size_t slot, const McOptions& options) {
  check_layout(samples, options);
  if (slot >= mu.size()) throw ValidationError("support index out of range");
  const StepSampler sampler(mu);
  std::vector<std::vector<std::uint64_t>> histograms(options.streams, std::vector<std::uint64_t>(n + 1, 0));
  parallel_for(options.streams, resolve_workers(options.workers), [&](std::size_t j) {
    CounterRng rng(stream_of(options, j));
    const std::uint64_t m = block_size(samples, options.streams, j);
    for (std::uint64_t s = 0; s < m; ++s) {
      std::size_t o = 0;
      for (std::size_t k = 0; k < n; ++k) o += sampler.slot(rng) == slot;
      ++histograms[j][o];
    }
  });
  std::vector<std::uint64_t> observed(n + 1, 0);
  for (const auto& h : histograms) {
    for (std::size_t k = 0; k <= n; ++k) observed[k] += h[k];
  }

  BinomialFit fit;
  const double ns = static_cast<double>(samples);
  for (auto o : observed) fit.frequencies.push_back(static_cast<double>(o) / ns);
  if (n == 0) return fit;

  const boost::math::binomial_distribution<double> law(static_cast<double>(n), mu.atoms()[slot].probability);
  std::vector<double> cell_expected, cell_observed;
  double e_acc = 0.0, o_acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    e_acc += ns * boost::math::pdf(law, static_cast<double>(k));
    o_acc += static_cast<double>(observed[k]);
    if (e_acc >= 5.0) {
      cell_expected.push_back(e_acc);
      cell_observed.push_back(o_acc);
      e_acc = o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (cell_expected.empty()) {
      cell_expected.push_back(e_acc);
      cell_observed.push_back(o_acc);
    } else {
      cell_expected.back() += e_acc;
      cell_observed.back() += o_acc;
    }
  }
  for (std::size_t c = 0; c < cell_expected.size(); ++c) {
    const double d = cell_observed[c] - cell_expected[c];
    fit.statistic += d * d / cell_expected[c];
  }
  fit.degrees_of_freedom = cell_expected.size() - 1;
  if (fit.degrees_of_freedom > 0) {
    const boost::math::chi_squared_distribution<double> chi(static_cast<double>(fit.degrees_of_freedom));
    fit.p_value = boost::math::cdf(boost::math::complement(chi, fit.statistic));
  }
  return fit;
}

// ---------------------------------------------------------------------------

void write_mc_csv(std::ostream& out, std::span<const McRow> rows) {
  out << "target,n,samples,estimate,stderr,method,seed\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%" PRIu64 ",%.17g,%.17g,", r.n, r.samples, r.estimate, r.stderr_);
    out << r.target << buf << r.method << ',' << r.seed << '\n';
  }
}

}  // namespace rangewalk
