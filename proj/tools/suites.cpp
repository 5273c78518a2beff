#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "rangewalk/classify.hpp"
#include "rangewalk/error.hpp"
#include "rangewalk/ladder.hpp"
#include "rangewalk/trace_codec.hpp"
#include "rangewalk/walk.hpp"

namespace rangewalk::cli {

using nlohmann::ordered_json;

namespace {

StepDistribution line(std::vector<std::pair<std::int64_t, double>> atoms) {
  std::vector<Atom> a;
  for (auto [k, p] : atoms) a.push_back({GroupElement::integer(k), p});
  return StepDistribution(GroupDescriptor::integer_line(), std::move(a));
}

StepDistribution free2(std::vector<std::pair<std::int64_t, double>> letters) {
  std::vector<Atom> a;
  for (auto [l, p] : letters) a.push_back({GroupElement::word({l}), p});
  return StepDistribution(GroupDescriptor::free_group(2), std::move(a));
}

}  // namespace

std::vector<NamedMeasure> test_measures() {
  return {
      {"symmetric-Z", line({{1, 0.5}, {-1, 0.5}})},
      {"drifted-Z", line({{1, 0.3}, {-1, 0.7}})},
      {"F2-uniform", free2({{1, 0.25}, {-1, 0.25}, {2, 0.25}, {-2, 0.25}})},
      {"directed-Z2", StepDistribution(GroupDescriptor::lattice(2),
                                       {{GroupElement::lattice({1, 0}), 0.5}, {GroupElement::lattice({0, 1}), 0.5}})},
  };
}

NamedMeasure asymmetric_f2() { return {"F2-asymmetric", free2({{1, 0.4}, {-1, 0.1}, {2, 0.3}, {-2, 0.2}})}; }

std::vector<NamedMeasure> codec_measures() {
  auto out = test_measures();
  out.push_back(asymmetric_f2());
  out.push_back({"Z-long-jumps", line({{-1, 0.5}, {2, 0.3}, {5, 0.2}})});
  out.push_back({"Z3-mixed", StepDistribution(GroupDescriptor::lattice(3),
                                              {{GroupElement::lattice({1, 0, 0}), 0.4},
                                               {GroupElement::lattice({0, 1, 0}), 0.3},
                                               {GroupElement::lattice({-1, -1, 1}), 0.3}})});
  out.push_back({"Z3xZ4", StepDistribution(GroupDescriptor::cyclic_product({3, 4}),
                                           {{GroupElement::residues({1, 0}), 0.5},
                                            {GroupElement::residues({0, 3}), 0.5}})});
  return out;
}

SuiteResult subadditivity_suite(const EntropySequence& seq, double tolerance) {
  SuiteResult r{"subadditivity"};
  const auto violations = check_subadditivity(seq, tolerance);
  r.passed = violations.empty();
  r.detail["n_max"] = seq.n_max();
  r.detail["trace_tracks"] = seq.has_trace();
  r.detail["violations"] = ordered_json::array();
  for (const auto& v : violations) {
    r.detail["violations"].push_back({{"track", v.track}, {"n", v.n}, {"m", v.m}, {"lhs", v.lhs}, {"rhs", v.rhs}});
  }
  return r;
}

SuiteResult sandwich_suite(const StepDistribution& mu, const EntropySequence& seq) {
  SuiteResult r{"sandwich"};
  constexpr double slack = 1e-12;
  const double step = mu.entropy();
  ordered_json failures = ordered_json::array();
  for (std::size_t n = 0; n <= seq.n_max(); ++n) {
    const double hr = seq.h_r[n], hrs = seq.h_rs[n];
    const double ln = std::log(static_cast<double>(n) + 1);
    const bool ok = hr <= hrs + slack && hrs <= hr + ln + slack && hrs <= static_cast<double>(n) * step + slack;
    if (!ok) failures.push_back({{"n", n}, {"H_R", hr}, {"H_RS", hrs}, {"n_H_X1", static_cast<double>(n) * step}});
  }
  r.passed = failures.empty();
  r.detail["n_max"] = seq.n_max();
  r.detail["failures"] = failures;
  return r;
}

SuiteResult reversal_suite(const StepDistribution& mu, std::size_t n_max, const ExactOptions& options,
                           double tolerance) {
  SuiteResult r{"reversal"};
  double worst = 0.0;
  ordered_json tv = ordered_json::array();
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double d = reversal_law_check(mu, n, options);
    tv.push_back(d);
    worst = std::max(worst, d);
  }
  r.passed = worst <= tolerance;
  r.detail["n_max"] = n_max;
  r.detail["tolerance"] = tolerance;
  r.detail["max_tv"] = worst;
  r.detail["tv"] = tv;
  return r;
}

SuiteResult lemma31_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r{"lemma31"};
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(0.3);
  std::uniform_real_distribution<double> alpha(1.0, 4.0);
  std::size_t failures = 0;
  double tightest = -1e300;
  for (std::size_t t = 0; t < cases; ++t) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<double> p(n);
    double sum = 0;
    for (auto& x : p) sum += (x = gamma(rng) + 1e-300);
    for (auto& x : p) x /= sum;
    const auto b = lemma31_bound(p, alpha(rng));
    if (!b.holds()) ++failures;
    tightest = std::max(tightest, b.lhs - b.rhs);
  }
  r.passed = failures == 0;
  r.detail["cases"] = cases;
  r.detail["failures"] = failures;
  r.detail["max_lhs_minus_rhs"] = tightest;
  return r;
}

SuiteResult lemma61_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r{"lemma61"};
  const Certified c = lemma61_constant();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t failures = 0, decreasing = 0;
  for (std::size_t t = 0; t < cases; ++t) {
    const std::size_t len = 1 + rng() % 300;
    std::vector<double> p(len);
    double total = 0;
    for (auto& x : p) total += (x = u(rng) < 0.2 ? 0.0 : std::pow(u(rng), 1 + 6 * u(rng)));
    if (total == 0.0) {
      p[0] = 1.0;
      total = 1.0;
    }
    for (auto& x : p) x /= total;
    if (t % 2 == 0) std::sort(p.begin(), p.end(), std::greater<>());
    const auto b = entropy_integral_bounds(p);
    if (!b.upper_holds) ++failures;
    if (b.decreasing) {
      ++decreasing;
      if (!b.lower_holds) ++failures;
    }
  }
  const bool c_ok = std::abs(c.value - 2.242976) <= 1e-6 && c.radius < 1e-5;
  r.passed = failures == 0 && c_ok;
  r.detail["cases"] = cases;
  r.detail["decreasing_cases"] = decreasing;
  r.detail["failures"] = failures;
  r.detail["C"] = {{"value", c.value}, {"lower", c.lower()}, {"upper", c.upper()}};
  return r;
}

SuiteResult boundary_suite(const StepDistribution& mu, const EntropySequence& seq, std::size_t cond_n_max,
                           const ExactOptions& options) {
  SuiteResult r{"boundary"};
  const Group& group = mu.group();
  std::vector<GroupElement> dirs;
  for (const auto& a : mu.atoms()) {
    if (!group.is_identity(a.element) && a.probability < 1.0) dirs.push_back(a.element);
  }
  const auto expected = expected_boundary_by_paths(mu, seq.n_max(), dirs, options);
  ordered_json rows = ordered_json::array();
  bool ok = true;
  double min_margin = 1e300;
  for (std::size_t n = 0; n <= seq.n_max(); ++n) {
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const auto b = boundary_report(mu, n, dirs[j], expected[n][j], seq.h_r[n]);
      ok = ok && b.ok;
      min_margin = std::min(min_margin, b.h_range - b.bound);
      if (n == seq.n_max())
        rows.push_back({{"n", n}, {"g", group.format(dirs[j])}, {"E_boundary", b.expected_boundary},
                        {"bound", b.bound}, {"H_R", b.h_range}, {"ok", b.ok}});
    }
  }
  ordered_json cond = ordered_json::array();
  for (const auto& d : conditional_endpoint_sequence(mu, cond_n_max, options)) {
    const std::size_t n = d.n;
    ok = ok && d.ok;
    cond.push_back({{"n", n}, {"H_S_given_R", d.h_endpoint_given_range}, {"max_ln2_moment", d.max_ln2_moment},
                    {"ln2_bound", d.ln2_bound}, {"ok", d.ok}});
  }
  r.passed = ok;
  r.detail["n_max"] = seq.n_max();
  r.detail["min_margin"] = min_margin;
  r.detail["at_n_max"] = rows;
  r.detail["conditional"] = cond;
  return r;
}

SuiteResult aep_suite(const StepDistribution& mu, std::size_t n, std::size_t trajectories, std::uint64_t seed,
                      const ExactOptions& options) {
  SuiteResult r{"aep"};
  const Law law = law_range_endpoint(mu, n, options);
  std::vector<Trajectory> trajs;
  trajs.reserve(trajectories);
  for (std::size_t s = 0; s < trajectories; ++s) trajs.push_back(sample_trajectory(mu, n, {seed, s}));
  const auto a = aep_samples(mu.group(), law, n, trajs);
  bool finite = true;
  double lo = 1e300, hi = -1e300;
  for (double v : a.values) {
    finite = finite && std::isfinite(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool certified = false;
  try {
    certified = find_positive_grading(mu).has_value();
  } catch (const UnsupportedError&) {
  }
  bool exact_ok = true;
  if (certified && n > 0) {
    for (double v : a.values) exact_ok = exact_ok && std::abs(v - mu.entropy()) <= 1e-12;
  }
  r.passed = finite && exact_ok;
  r.detail["n"] = n;
  r.detail["trajectories"] = trajectories;
  r.detail["mean"] = a.mean;
  r.detail["variance"] = a.variance;
  r.detail["min"] = lo;
  r.detail["max"] = hi;
  r.detail["grading_certificate"] = certified;
  if (certified) r.detail["expected"] = mu.entropy();
  return r;
}

SuiteResult codec_suite(const std::vector<NamedMeasure>& measures, std::size_t trajectories, std::size_t max_n,
                        std::uint64_t seed, std::size_t entropy_n) {
  SuiteResult r{"codec"};
  std::size_t cases = 0, round_trip_failures = 0, injectivity_failures = 0, entropy_mismatches = 0;
  std::mt19937_64 lengths(seed);
  ordered_json per = ordered_json::array();
  for (std::size_t m = 0; m < measures.size(); ++m) {
    const auto& mu = measures[m].mu;
    const Group& g = mu.group();
    std::map<std::string, std::string> key_to_structural, structural_to_key;
    for (std::size_t s = 0; s < trajectories; ++s) {
      const std::size_t n = 1 + lengths() % max_n;
      const auto t = trace_of(g, sample_trajectory(mu, n, {seed + 1 + m, s}));
      const auto code = encode(t, g);
      if (!(decode(code, g) == t)) ++round_trip_failures;
      const auto key = serialize(code);
      const auto structural = t.structural_key();
      const auto [a, fresh_a] = key_to_structural.emplace(key, structural);
      const auto [b, fresh_b] = structural_to_key.emplace(structural, key);
      if (a->second != structural || b->second != key) ++injectivity_failures;
      ++cases;
    }
    const double h_trace = entropy(law_by_paths(mu, entropy_n, Outcome::Trace));
    const double h_code = entropy(law_by_paths(mu, entropy_n, Outcome::Code));
    const double h_trace_s = entropy(law_by_paths(mu, entropy_n, Outcome::TraceEndpoint));
    const double h_code_s = entropy(law_by_paths(mu, entropy_n, Outcome::CodeEndpoint));
    const bool equal = h_trace == h_code && h_trace_s == h_code_s;
    if (!equal) ++entropy_mismatches;
    per.push_back({{"measure", measures[m].name}, {"group", to_string(g.kind())}, {"H_Gamma", h_trace},
                   {"H_code", h_code}, {"H_Gamma_S", h_trace_s}, {"H_code_S", h_code_s}, {"equal", equal}});
  }
  r.passed = round_trip_failures == 0 && injectivity_failures == 0 && entropy_mismatches == 0;
  r.detail["cases"] = cases;
  r.detail["max_n"] = max_n;
  r.detail["round_trip_failures"] = round_trip_failures;
  r.detail["injectivity_failures"] = injectivity_failures;
  r.detail["entropy_n"] = entropy_n;
  r.detail["entropy_mismatches"] = entropy_mismatches;
  r.detail["measures"] = per;
  return r;
}

}  // namespace rangewalk::cli
