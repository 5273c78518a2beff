#include "rangewalk/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "rangewalk/error.hpp"
#include "rangewalk/walk.hpp"

namespace rangewalk {

std::string_view to_string(WalkClassKind kind) {
  switch (kind) {
    case WalkClassKind::Recurrent:
      return "Recurrent";
    case WalkClassKind::TransientNoLeftJump:
      return "TransientNoLeftJump";
    case WalkClassKind::TransientOther:
      return "TransientOther";
    case WalkClassKind::Unknown:
      break;
  }
  return "Unknown";
}

namespace {

// Below this a nonzero mean read from double probabilities is not trusted.
constexpr double kAmbiguousMean = 1e-12;

std::vector<Rational> exact_probabilities(const StepDistribution& mu) {
  if (mu.has_exact()) return {mu.exact().begin(), mu.exact().end()};
  std::vector<Rational> out;
  for (const auto& a : mu.atoms()) out.push_back(rational_from_double(a.probability));
  return out;
}

enum class Sign { Negative, Zero, Positive, Ambiguous };

Sign sign_of_mean(const Rational& mean, bool exact) {
  if (mean == 0) return Sign::Zero;
  if (!exact && std::abs(to_double(mean)) < kAmbiguousMean) return Sign::Ambiguous;
  return mean < 0 ? Sign::Negative : Sign::Positive;
}

// A walk living on an infinite cyclic subgroup <u>: support point i is u^k_i.
struct CyclicReduction {
  GroupElement generator;
  std::vector<std::int64_t> exponents;
};

// ---- free groups: roots of elements

using Word = std::vector<std::int64_t>;

Word to_word(const GroupElement& g) { return {g.payload().begin(), g.payload().end()}; }

Word inverse_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (auto& l : out) l = -l;
  return out;
}

// w = c d c^-1 with d cyclically reduced; returns (c, d).
std::pair<Word, Word> cyclic_split(const Word& w) {
  std::size_t i = 0;
  while (2 * i + 1 < w.size() && w[i] == -w[w.size() - 1 - i]) ++i;
  return {Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i)),
          Word(w.begin() + static_cast<std::ptrdiff_t>(i), w.end() - static_cast<std::ptrdiff_t>(i))};
}

// x = root^k with root not a proper power, k >= 1.
std::pair<Word, std::int64_t> free_root(const Word& x) {
  auto [c, d] = cyclic_split(x);
  const std::size_t len = d.size();
  for (std::size_t p = 1; p <= len; ++p) {
    if (len % p != 0) continue;
    bool periodic = true;
    for (std::size_t i = p; i < len && periodic; ++i) periodic = d[i] == d[i - p];
    if (!periodic) continue;
    Word root = c;
    root.insert(root.end(), d.begin(), d.begin() + static_cast<std::ptrdiff_t>(p));
    const Word ci = inverse_word(c);
    root.insert(root.end(), ci.begin(), ci.end());
    return {root, static_cast<std::int64_t>(len / p)};
  }
  return {x, 1};
}

// ---- lattices

std::size_t lattice_rank(const StepDistribution& mu, std::size_t d) {
  std::vector<std::vector<__int128>> rows;
  for (const auto& a : mu.atoms()) {
    std::vector<__int128> r;
    for (std::size_t j = 0; j < d; ++j) r.push_back(a.element.payload()[j]);
    rows.push_back(std::move(r));
  }
  // Fraction-free elimination.
  std::size_t rank = 0;
  for (std::size_t col = 0; col < d && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t i = rank + 1; i < rows.size(); ++i) {
      const __int128 f = rows[i][col], g = rows[rank][col];
      if (f == 0) continue;
      __int128 common = 0;
      for (std::size_t j = 0; j < d; ++j) {
        rows[i][j] = rows[i][j] * g - rows[rank][j] * f;
        const __int128 v = rows[i][j] < 0 ? -rows[i][j] : rows[i][j];
        common = std::gcd(static_cast<unsigned long long>(common), static_cast<unsigned long long>(v));
      }
      if (common > 1) {
        for (auto& v : rows[i]) v /= common;
      }
    }
    ++rank;
  }
  return rank;
}

std::optional<CyclicReduction> reduce_lattice(const StepDistribution& mu, std::size_t d) {
  if (lattice_rank(mu, d) > 1) return std::nullopt;
  std::vector<std::int64_t> v;
  for (const auto& a : mu.atoms()) {
    const auto& p = a.element.payload();
    if (std::any_of(p.begin(), p.end(), [](std::int64_t x) { return x != 0; })) {
      std::int64_t g = 0;
      for (auto x : p) g = std::gcd(g, x);
      for (auto x : p) v.push_back(x / g);
      break;
    }
  }
  CyclicReduction out{GroupElement::lattice(v), {}};
  std::size_t lead = 0;
  while (v[lead] == 0) ++lead;
  for (const auto& a : mu.atoms()) out.exponents.push_back(a.element.payload()[lead] / v[lead]);
  return out;
}

std::optional<CyclicReduction> reduce_free(const StepDistribution& mu) {
  std::optional<Word> root;
  CyclicReduction out;
  for (const auto& a : mu.atoms()) {
    const Word w = to_word(a.element);
    if (w.empty()) {
      out.exponents.push_back(0);
      continue;
    }
    auto [r, k] = free_root(w);
    if (!root) root = r;
    if (r == *root) {
      out.exponents.push_back(k);
    } else if (r == inverse_word(*root)) {
      out.exponents.push_back(-k);
    } else {
      return std::nullopt;  // two non-commuting support points
    }
  }
  out.generator = GroupElement::word(*root);
  return out;
}

std::optional<CyclicReduction> cyclic_reduction(const StepDistribution& mu) {
  switch (mu.descriptor().kind) {
    case GroupKind::IntegerLine: {
      CyclicReduction out{GroupElement::integer(1), {}};
      for (const auto& a : mu.atoms()) out.exponents.push_back(a.element.value());
      return out;
    }
    case GroupKind::IntegerLattice:
      return reduce_lattice(mu, mu.descriptor().parameter);
    case GroupKind::FreeGroup:
      return reduce_free(mu);
    default:
      return std::nullopt;
  }
}

GroupElement power(const Group& group, const GroupElement& u, std::int64_t k) {
  GroupElement base = k < 0 ? group.inverse(u) : u;
  GroupElement out = group.identity();
  for (std::int64_t i = 0; i < std::abs(k); ++i) group.mul_in_place(out, base);
  return out;
}

struct LineVerdict {
  Sign sign = Sign::Zero;
  std::optional<std::int64_t> witness;  // exponent of the generator
  std::string evidence;
};

// A one-dimensional walk with steps k_i (in units of the generator).
LineVerdict line_verdict(const StepDistribution& mu, const std::vector<std::int64_t>& k) {
  const auto probs = exact_probabilities(mu);
  Rational mean = 0;
  std::int64_t g = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    mean += probs[i] * k[i];
    g = std::gcd(g, k[i]);
  }
  LineVerdict out;
  out.sign = sign_of_mean(mean, mu.has_exact());
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean %.17g in units of the generator, step gcd %lld", to_double(mean),
                static_cast<long long>(g));
  out.evidence = buf;
  if (g == 0 || out.sign == Sign::Zero || out.sign == Sign::Ambiguous) return out;
  const auto [lo, hi] = std::minmax_element(k.begin(), k.end());
  // a = +g: supp within {-g, 0, g, 2g, ...}, mass at -g, negative drift.
  if (*lo == -g && out.sign == Sign::Negative) out.witness = g;
  if (*hi == g && out.sign == Sign::Positive) out.witness = -g;
  return out;
}

}  // namespace

std::optional<GroupElement> detect_no_left_jump(const StepDistribution& mu) {
  if (mu.descriptor().kind != GroupKind::IntegerLine) {
    throw UnsupportedError("no-left-jump detection is defined on the integer line");
  }
  std::vector<std::int64_t> k;
  for (const auto& a : mu.atoms()) k.push_back(a.element.value());
  const auto v = line_verdict(mu, k);
  if (!v.witness) return std::nullopt;
  return GroupElement::integer(*v.witness);
}

WalkClass classify(const StepDistribution& mu, const ClassifyOptions& options) {
  WalkClass out;
  const GroupDescriptor& desc = mu.descriptor();
  auto& ev = out.evidence;

  if (desc.kind == GroupKind::FiniteCyclicProduct) {
    ev.push_back("finite group: every walk is recurrent");
    out.kind = WalkClassKind::Recurrent;
  } else if (auto red = cyclic_reduction(mu)) {
    if (desc.kind != GroupKind::IntegerLine) {
      ev.push_back("support lies in the infinite cyclic subgroup generated by " + mu.group().format(red->generator));
    }
    const auto v = line_verdict(mu, red->exponents);
    ev.push_back(v.evidence);
    if (v.sign == Sign::Zero) {
      ev.push_back("zero mean with finite support on a cyclic group: recurrent (Chung-Fuchs)");
      out.kind = WalkClassKind::Recurrent;
    } else if (v.sign == Sign::Ambiguous) {
      ev.push_back("mean below 1e-12 from inexact probabilities: sign undecided");
      out.kind = WalkClassKind::Unknown;
    } else if (v.witness) {
      out.witness = power(mu.group(), red->generator, *v.witness);
      ev.push_back("nonzero mean: transient; support within {a^-1, e, a, a^2, ...} with drift against a, a = " +
                   mu.group().format(*out.witness));
      ev.push_back("L_mu read as support inclusion; a finite support never equals the infinite set");
      out.kind = WalkClassKind::TransientNoLeftJump;
    } else {
      ev.push_back("nonzero mean: transient; no left-jump-free witness");
      out.kind = WalkClassKind::TransientOther;
    }
  } else if (desc.kind == GroupKind::IntegerLattice) {
    const std::size_t rank = lattice_rank(mu, desc.parameter);
    const auto probs = exact_probabilities(mu);
    bool zero = true, ambiguous = false;
    for (std::size_t j = 0; j < desc.parameter; ++j) {
      Rational m = 0;
      for (std::size_t i = 0; i < mu.size(); ++i) m += probs[i] * mu.atoms()[i].element.payload()[j];
      const Sign s = sign_of_mean(m, mu.has_exact());
      if (s == Sign::Ambiguous) ambiguous = true;
      if (s != Sign::Zero) zero = false;
    }
    ev.push_back("support spans a rank-" + std::to_string(rank) + " sublattice");
    if (ambiguous) {
      ev.push_back("mean below 1e-12 from inexact probabilities: sign undecided");
      out.kind = WalkClassKind::Unknown;
    } else if (!zero) {
      ev.push_back("nonzero mean: transient (law of large numbers); rank >= 2 admits no left-jump-free witness");
      out.kind = WalkClassKind::TransientOther;
    } else if (rank <= 2) {
      ev.push_back("zero mean, finite support, rank 2: recurrent");
      out.kind = WalkClassKind::Recurrent;
    } else {
      ev.push_back("rank >= 3: transient");
      out.kind = WalkClassKind::TransientOther;
    }
  } else if (desc.kind == GroupKind::FreeGroup) {
    ev.push_back("support generates a non-abelian free subgroup: transient");
    out.kind = WalkClassKind::TransientOther;
  } else {
    out.kind = WalkClassKind::Unknown;
  }

  if (options.mc_evidence || out.kind == WalkClassKind::Unknown) {
    out.escape = escape_rate(mu, options.horizon, options.samples, options.mc);
    char buf[160];
    std::snprintf(buf, sizeof buf, "escape estimate %.6f +- %.6f at horizon %llu", out.escape->estimate,
                  out.escape->ci_half_width, static_cast<unsigned long long>(options.horizon));
    ev.push_back(buf);
  }
  return out;
}

VanishingPrediction predict_vanishing(const WalkClass& cls) {
  switch (cls.kind) {
    case WalkClassKind::Recurrent:
      return {true, true};
    case WalkClassKind::TransientNoLeftJump:
      return {true, false};
    case WalkClassKind::TransientOther:
      return {false, false};
    case WalkClassKind::Unknown:
      break;
  }
  throw UnsupportedError("no prediction for an unclassified walk");
}

// ---------------------------------------------------------------------------
// Gradings

std::int64_t Grading::operator()(const GroupElement& x) const {
  std::int64_t v = 0;
  if (x.kind() == GroupKind::FreeGroup) {
    for (auto l : x.payload()) {
      const auto j = static_cast<std::size_t>(std::abs(l)) - 1;
      v += l > 0 ? weights[j] : -weights[j];
    }
    return v;
  }
  for (std::size_t j = 0; j < weights.size(); ++j) v += weights[j] * x.payload()[j];
  return v;
}

std::optional<Grading> find_positive_grading(const StepDistribution& mu) {
  const GroupDescriptor& desc = mu.descriptor();
  std::size_t dim = 0;
  switch (desc.kind) {
    case GroupKind::IntegerLine:
      dim = 1;
      break;
    case GroupKind::IntegerLattice:
    case GroupKind::FreeGroup:
      dim = desc.parameter;
      break;
    default:
      return std::nullopt;  // finite groups have no nonzero homomorphism to Z
  }
  // Candidate weights in enumeration order of Z^dim: shells of growing size.
  const Group weights(dim == 1 ? GroupDescriptor::integer_line() : GroupDescriptor::lattice(dim));
  constexpr std::uint64_t kCandidates = 200'000;
  for (std::uint64_t i = 1; i < kCandidates; ++i) {
    const GroupElement w = weights.enumerate(i);
    Grading g{{w.payload().begin(), w.payload().end()}};
    if (std::all_of(mu.atoms().begin(), mu.atoms().end(), [&](const Atom& a) { return g(a.element) > 0; })) return g;
  }
  return std::nullopt;
}

std::vector<GroupElement> reconstruct_steps(const Group& group, const Grading& grading,
                                            std::vector<GroupElement> range) {
  std::sort(range.begin(), range.end(),
            [&](const GroupElement& a, const GroupElement& b) { return grading(a) < grading(b); });
  std::vector<GroupElement> steps;
  for (std::size_t i = 1; i < range.size(); ++i) {
    if (grading(range[i]) == grading(range[i - 1])) throw ValidationError("grading is not strictly increasing on the range");
    steps.push_back(group.mul(group.inverse(range[i - 1]), range[i]));
  }
  return steps;
}

GammaOneReport check_gamma_escape_one(const StepDistribution& mu, std::size_t n_max, const GammaOneOptions& options) {
  auto grading = find_positive_grading(mu);
  if (!grading) throw UnsupportedError("no strictly positive grading certifies an escape rate of 1");
  GammaOneReport out;
  out.grading = *grading;
  out.n_max = n_max;
  out.step_entropy = mu.entropy();
  const auto seq = entropy_sequence(mu, n_max, {.exact = options.exact, .trace = false});
  out.h_r = seq.h_r;
  out.h_rs = seq.h_rs;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double target = static_cast<double>(n) * out.step_entropy;
    out.max_deviation = std::max({out.max_deviation, std::abs(seq.h_r[n] - target), std::abs(seq.h_rs[n] - target)});
  }

  const std::size_t len = options.trajectory_length == 0 ? n_max : options.trajectory_length;
  const Group& group = mu.group();
  for (std::size_t t = 0; t < options.trajectories; ++t) {
    const Trajectory traj = sample_trajectory(mu, len, {options.seed, t});
    IncrementalWalk walk(group);
    for (const auto& s : traj.steps) walk.step(s);
    ++out.sampled;
    if (reconstruct_steps(group, out.grading, walk.range().elements()) == traj.steps) ++out.reconstructed;
  }
  out.ok = out.max_deviation <= options.tolerance && out.reconstructed == out.sampled;
  return out;
}

// ---------------------------------------------------------------------------

bool TheoremReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ReportCheck& c) { return c.passed; });
}

TheoremReport trend_report(const StepDistribution& mu, const EntropySequence& seq, const WalkClass& cls,
                           std::optional<double> trace_lower_bound, const TrendOptions& options) {
  TheoremReport out;
  out.walk_class = cls;
  out.trace_lower_bound = trace_lower_bound;
  const std::size_t n_max = seq.n_max();
  out.rs_rate.assign(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) out.rs_rate[n] = seq.h_rs[n] / static_cast<double>(n);
  if (seq.has_trace()) {
    out.gs_rate.assign(seq.h_gs.size(), 0.0);
    for (std::size_t n = 1; n < seq.h_gs.size(); ++n) out.gs_rate[n] = seq.h_gs[n] / static_cast<double>(n);
  }
  char buf[256];

  auto doubling = [&](const std::vector<double>& rate, const char* name) {
    const std::size_t last = rate.empty() ? 0 : rate.size() - 1;
    const std::size_t m = last / 2;
    ReportCheck c{name, false, ""};
    if (m < 1) {
      c.detail = "sequence too short for a doubling step";
    } else {
      c.passed = rate[2 * m] < rate[m] - options.margin;
      std::snprintf(buf, sizeof buf, "rate(%zu) = %.12f, rate(%zu) = %.12f", m, rate[m], 2 * m, rate[2 * m]);
      c.detail = buf;
    }
    out.checks.push_back(std::move(c));
  };

  if (cls.kind != WalkClassKind::Unknown) {
    out.prediction = predict_vanishing(cls);
    if (out.prediction->h_r_zero) doubling(out.rs_rate, "range-rate-decreases");
    if (out.prediction->h_gamma_zero && seq.has_trace()) doubling(out.gs_rate, "trace-rate-decreases");
    if (!out.prediction->h_gamma_zero && trace_lower_bound && seq.has_trace()) {
      ReportCheck c{"trace-rate-above-lower-bound", true, ""};
      double worst = INFINITY;
      std::size_t at = 0;
      for (std::size_t n = 1; n < out.gs_rate.size(); ++n) {
        if (out.gs_rate[n] < worst) {
          worst = out.gs_rate[n];
          at = n;
        }
        if (out.gs_rate[n] < *trace_lower_bound) c.passed = false;
      }
      std::snprintf(buf, sizeof buf, "min rate %.12f at n = %zu against bound %.12f", worst, at, *trace_lower_bound);
      c.detail = buf;
      out.checks.push_back(std::move(c));
    }
  }

  if (find_positive_grading(mu)) {
    out.h_r_equals_step_entropy = true;
    const double h = mu.entropy();
    ReportCheck c{"range-rate-equals-step-entropy", true, ""};
    double dev = 0.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
      dev = std::max({dev, std::abs(out.rs_rate[n] - h), std::abs(seq.h_r[n] - seq.h_rs[n])});
    }
    c.passed = dev <= options.tolerance;
    std::snprintf(buf, sizeof buf, "max deviation %.3e from H(X_1) = %.12f", dev, h);
    c.detail = buf;
    out.checks.push_back(std::move(c));
  }
  return out;
}

}  // namespace rangewalk
