#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "measures.hpp"
#include "rangewalk/dist_exact.hpp"
#include "rangewalk/error.hpp"
#include "rangewalk/estimate_mc.hpp"

using namespace rangewalk;
using namespace rangewalk::testing;

namespace {

const double kLn2 = std::log(2.0);

// P(S_k not in targets, 1 <= k <= N) for an integer-line walk by forward DP
// with absorption.
std::vector<double> line_survival(const std::vector<std::pair<std::int64_t, double>>& steps,
                                  const std::vector<std::int64_t>& targets, const std::vector<std::uint64_t>& horizons) {
  const std::uint64_t h = *std::max_element(horizons.begin(), horizons.end());
  std::int64_t reach = 0;
  for (auto& [s, p] : steps) reach = std::max(reach, std::abs(s));
  const std::int64_t width = static_cast<std::int64_t>(h) * reach;
  std::vector<double> cur(2 * width + 1, 0.0), next(cur.size());
  cur[width] = 1.0;
  std::vector<double> out;
  for (std::uint64_t k = 1; k <= h; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t x = 0; x < static_cast<std::int64_t>(cur.size()); ++x) {
      if (cur[x] == 0.0) continue;
      for (auto& [s, p] : steps) {
        const std::int64_t y = x + s;
        if (y >= 0 && y < static_cast<std::int64_t>(next.size())) next[y] += cur[x] * p;
      }
    }
    for (auto t : targets) next[t + width] = 0.0;
    cur.swap(next);
    if (std::find(horizons.begin(), horizons.end(), k) != horizons.end()) {
      double mass = 0;
      for (double v : cur) mass += v;
      out.push_back(mass);
    }
  }
  return out;
}

// Word length of the uniform walk on F_2 is the birth-death chain
// 0 -> 1, l -> l+1 w.p. 3/4, l -> l-1 w.p. 1/4; survival before returning to 0.
double f2_survival(std::uint64_t horizon) {
  std::vector<double> cur(horizon + 2, 0.0), next(cur.size());
  cur[1] = 1.0;  // after the first step
  for (std::uint64_t k = 2; k <= horizon; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t l = 1; l + 1 < cur.size(); ++l) {
      next[l + 1] += 0.75 * cur[l];
      next[l - 1] += 0.25 * cur[l];
    }
    next[0] = 0.0;
    cur.swap(next);
  }
  double mass = 0;
  for (double v : cur) mass += v;
  return mass;
}

}  // namespace

TEST_CASE("plug-in and Miller-Madow from counts") {
  const std::vector<std::uint64_t> even = {2, 2};
  CHECK(plug_in_entropy(even) == doctest::Approx(kLn2).epsilon(1e-15));
  const std::vector<std::uint64_t> skew = {3, 1};
  const double oracle = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  CHECK(std::abs(plug_in_entropy(skew) - oracle) < 1e-15);
  CHECK(std::abs(plug_in_entropy(skew) - 0.562335) < 1e-6);
  CHECK(std::abs(miller_madow_entropy(skew) - (oracle + 0.125)) < 1e-15);
  const std::vector<std::uint64_t> with_zero = {3, 0, 1};
  CHECK(miller_madow_entropy(with_zero) == miller_madow_entropy(skew));
  const std::vector<std::uint64_t> single = {7};
  CHECK(plug_in_entropy(single) == 0.0);
  CHECK(miller_madow_entropy(single) == 0.0);
}

TEST_CASE("mc entropy agrees with exact laws at small n") {
  const std::size_t n = 6;
  const std::uint64_t samples = 20'000;
  for (const auto& mu : {z_walk(0.5), z_walk(0.3), f2_uniform(), directed_z2()}) {
    for (Outcome target : {Outcome::Range, Outcome::RangeEndpoint, Outcome::Trace, Outcome::TraceEndpoint}) {
      const Law law = law_by_paths(mu, n, target);
      const double exact = entropy(law);
      const auto est = mc_entropy(mu, n, samples, target, {.seed = 7});
      const double bias = static_cast<double>(est.distinct - 1) / (2.0 * static_cast<double>(samples));
      CAPTURE(mu.descriptor().to_string());
      CAPTURE(static_cast<int>(target));
      CHECK(std::abs(est.plug_in - exact) <= 3 * (est.stderr_ + bias));
      CHECK(est.distinct <= law.size());
      CHECK(est.value >= 0.0);
      CHECK(est.miller_madow == doctest::Approx(est.plug_in + bias).epsilon(1e-12));
    }
  }
}

TEST_CASE("mc entropy is reproducible and independent of the worker count") {
  const auto mu = f2_asymmetric();
  const auto a = mc_entropy(mu, 5, 4000, Outcome::TraceEndpoint, {.seed = 3, .streams = 16, .workers = 1});
  const auto b = mc_entropy(mu, 5, 4000, Outcome::TraceEndpoint, {.seed = 3, .streams = 16, .workers = 4});
  CHECK(a.value == b.value);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.distinct == b.distinct);
  const auto c = mc_entropy(mu, 5, 4000, Outcome::TraceEndpoint, {.seed = 4, .streams = 16});
  CHECK(c.value != a.value);
  const auto mm = mc_entropy(mu, 5, 4000, Outcome::TraceEndpoint, {.seed = 3, .streams = 16},
                             EntropyMethod::MillerMadow);
  CHECK(mm.value == mm.miller_madow);
  CHECK(mm.plug_in == a.plug_in);
  CHECK(to_string(mm.method) == "miller-madow");
}

TEST_CASE("directed lattice entropy rate from samples") {
  // 2^12 equally likely ranges: well sampled at 10^5.
  const auto est = mc_entropy(directed_z2(), 12, 100'000, Outcome::Range, {.seed = 11});
  CHECK(std::abs(est.value / 12 - kLn2) < 0.05);
  // 2^20 outcomes at 10^5 samples: the plug-in value is capped near ln N.
  const auto under = mc_entropy(directed_z2(), 20, 100'000, Outcome::Range, {.seed = 11});
  CHECK(under.value <= std::log(100'000.0) + 1e-9);
  CHECK(under.value / 20 < kLn2);
}

TEST_CASE("escape rates") {
  const std::vector<std::uint64_t> grid = {10, 100, 1000, 10'000};
  const McOptions opts{.seed = 2024};

  SUBCASE("drifted integer walk") {
    const auto est = escape_rate(z_walk(0.3), grid, 100'000, opts);
    const auto oracle = line_survival({{1, 0.3}, {-1, 0.7}}, {0}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CAPTURE(grid[i]);
      CHECK(std::abs(est[i].estimate - oracle[i]) <= 3 * est[i].ci_half_width + 1e-12);
      if (i > 0) CHECK(est[i].estimate <= est[i - 1].estimate);
    }
    CHECK(std::abs(oracle.back() - 0.4) < 1e-9);
    CHECK(std::abs(est.back().estimate - 0.4) <= 0.01);
  }
  SUBCASE("uniform F_2") {
    const auto est = escape_rate(f2_uniform(), grid, 100'000, opts);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(est[i].estimate <= est[i - 1].estimate);
    const double oracle = f2_survival(10'000);
    CHECK(std::abs(oracle - 2.0 / 3.0) < 1e-9);
    CHECK(std::abs(est.back().estimate - oracle) <= 3 * est.back().ci_half_width);
    CHECK(std::abs(est.back().estimate - 2.0 / 3.0) <= 0.01);
  }
  SUBCASE("directed lattice never returns") {
    for (const auto& e : escape_rate(directed_z2(), grid, 10'000, opts)) {
      CHECK(e.estimate == 1.0);
      CHECK(e.ci_half_width == 0.0);
    }
  }
  SUBCASE("symmetric integer walk") {
    const auto est = escape_rate(z_walk(0.5), grid, 100'000, opts);
    const auto oracle = line_survival({{1, 0.5}, {-1, 0.5}}, {0}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(est[i].estimate - oracle[i]) <= 3 * est[i].ci_half_width + 1e-12);
    }
    CHECK(est.back().estimate <= 0.05);
  }
  SUBCASE("long jumps and a finite group") {
    const std::vector<std::uint64_t> small = {5, 50, 500};
    const auto est = escape_rate(z_long_jumps(), small, 50'000, opts);
    const auto oracle = line_survival({{-1, 0.5}, {2, 0.3}, {0, 0.2}}, {0}, small);
    for (std::size_t i = 0; i < small.size(); ++i) {
      CHECK(std::abs(est[i].estimate - oracle[i]) <= 3 * est[i].ci_half_width + 1e-12);
    }
    // A finite group is recurrent.
    CHECK(escape_rate(cyclic5(), 200, 10'000, opts).estimate < 1e-3);
  }
}

TEST_CASE("half-width formula and worker independence of hitting estimates") {
  const std::vector<std::uint64_t> grid = {50, 500};
  const auto a = hitting_tail(z_walk(0.3), GroupElement::integer(1), grid, 20'000, {.seed = 5, .workers = 1});
  const auto b = hitting_tail(z_walk(0.3), GroupElement::integer(1), grid, 20'000, {.seed = 5, .workers = 3});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a[i].estimate == b[i].estimate);
    CHECK(a[i].horizon == grid[i]);
    CHECK(a[i].samples == 20'000);
    const double p = a[i].estimate;
    CHECK(a[i].ci_half_width == doctest::Approx(1.96 * std::sqrt(p * (1 - p) / 20'000.0)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(escape_rate(z_walk(0.3), 0, 10), ValidationError);
  CHECK_THROWS_AS(escape_rate(z_walk(0.3), 10, 0), ValidationError);
  CHECK_THROWS_AS(hitting_tail(z_walk(0.3), GroupElement::word({1}), 10, 10), DescriptorMismatch);
}

TEST_CASE("hitting tails") {
  const McOptions opts{.seed = 99};
  SUBCASE("drifted walk above the start") {
    const std::vector<std::uint64_t> grid = {100, 10'000};
    const auto est = hitting_tail(z_walk(0.3), GroupElement::integer(1), grid, 100'000, opts);
    const auto oracle = line_survival({{1, 0.3}, {-1, 0.7}}, {1}, grid);
    CHECK(std::abs(oracle.back() - 4.0 / 7.0) < 1e-9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(est[i].estimate - oracle[i]) <= 3 * est[i].ci_half_width);
    }
    CHECK(std::abs(est.back().estimate - 4.0 / 7.0) <= 0.01);
  }
  SUBCASE("symmetric walk hits every site") {
    const auto est = hitting_tail(z_walk(0.5), GroupElement::integer(1), 10'000, 100'000, opts);
    CHECK(est.estimate <= 0.02);
  }
  SUBCASE("unreachable lattice site") {
    const std::vector<std::uint64_t> grid = {1, 10, 10'000};
    for (const auto& e : hitting_tail(directed_z2(), GroupElement::lattice({-1, 0}), grid, 10'000, opts)) {
      CHECK(e.estimate == 1.0);
    }
  }
  SUBCASE("free group site") {
    // Hitting the generator a from e in uniform F_2: the length chain must
    // reach 1 on the correct branch; survival is 1 - (1/3) at infinity.
    const auto est = hitting_tail(f2_uniform(), GroupElement::word({1}), 2000, 50'000, opts);
    CHECK(std::abs(est.estimate - 2.0 / 3.0) <= 0.015);
  }
}

TEST_CASE("mean range rate") {
  const McOptions opts{.seed = 17};
  SUBCASE("directed lattice") {
    for (std::size_t n : {1, 7, 100}) {
      const auto m = mean_range_rate(directed_z2(), n, 500, opts);
      CHECK(m.mean == static_cast<double>(n + 1) / static_cast<double>(n));
      CHECK(m.stderr_ == 0.0);
    }
  }
  SUBCASE("drifted walk") {
    const auto m = mean_range_rate(z_walk(0.3), 10'000, 2000, opts);
    CHECK(std::abs(m.mean - 0.4) <= 0.01);
  }
  SUBCASE("symmetric walk") {
    const auto m = mean_range_rate(z_walk(0.5), 10'000, 2000, opts);
    CHECK(m.mean <= 0.05);
  }
  SUBCASE("matches the exact mean range") {
    for (const auto& mu : {z_walk(0.3), z_long_jumps(), f2_asymmetric(), cyclic5()}) {
      const std::size_t n = 8;
      double exact = 0;
      for (const auto& o : range_outcomes(mu, n)) exact += o.probability * static_cast<double>(o.range.size());
      exact /= n;
      const auto m = mean_range_rate(mu, n, 40'000, opts);
      CAPTURE(mu.descriptor().to_string());
      CHECK(std::abs(m.mean - exact) <= 4 * m.stderr_ + 1e-12);
    }
  }
}

TEST_CASE("trace entropy lower bound") {
  const McOptions opts{.seed = 31};
  SUBCASE("symmetric walk") {
    const auto b = h_gamma_lower_bound(z_walk(0.5), GroupElement::integer(1), 10'000, 10'000, opts, {.escape = 0.0});
    CHECK(b.c == 0.0);
    const auto mc = h_gamma_lower_bound(z_walk(0.5), GroupElement::integer(1), 10'000, 100'000, opts);
    CHECK(mc.c <= 0.05 * 0.35);
    CHECK(mc.truncated);
  }
  SUBCASE("drifted walk, exact factors") {
    const auto b = h_gamma_lower_bound(z_walk(0.3), GroupElement::integer(-1), 1, 1, opts,
                                       {.tail = 4.0 / 7.0, .escape = 0.4});
    CHECK(std::abs(b.entropy_factor - 0.249673) < 1e-6);
    CHECK(std::abs(b.c - 0.05707) < 1e-5);
    CHECK(b.ci_half_width == 0.0);
    CHECK_FALSE(b.truncated);
  }
  SUBCASE("drifted walk, estimated factors") {
    const auto b = h_gamma_lower_bound(z_walk(0.3), GroupElement::integer(-1), 10'000, 100'000, opts);
    CHECK(std::abs(b.tail - 4.0 / 7.0) <= 0.01);
    CHECK(std::abs(b.escape - 0.4) <= 0.01);
    CHECK(std::abs(b.c - 0.05707) <= 3 * b.ci_half_width + 1e-4);
  }
  SUBCASE("directed lattice") {
    const auto b = h_gamma_lower_bound(directed_z2(), GroupElement::lattice({1, 0}), 1000, 10'000, opts);
    CHECK(b.tail == 1.0);
    CHECK(b.escape == 1.0);
    CHECK(std::abs(b.c - 0.5 * kLn2) < 1e-15);
    CHECK(std::abs(b.c - 0.3466) < 1e-4);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(h_gamma_lower_bound(z_walk(0.3), GroupElement::integer(2), 10, 10), ValidationError);
  }
}

TEST_CASE("range entropy lower diagnostic") {
  const McOptions opts{.seed = 41};
  SUBCASE("symmetric walk vanishes") {
    const auto d = h_r_lower_bound_diag(z_walk(0.5), GroupElement::integer(1), 10'000, 50'000, opts);
    CHECK(d.value <= 0.01);
    const auto shorter = h_r_lower_bound_diag(z_walk(0.5), GroupElement::integer(1), 100, 50'000, opts);
    CHECK(d.value < shorter.value);
  }
  SUBCASE("nearest-neighbour drift gives zero") {
    // -1 is hit almost surely; for g = +1 the reversed walk drifts up without
    // skipping levels and cannot avoid both 0 and +1.
    const auto mu = z_walk(0.3);
    for (std::int64_t g : {-1, 1}) {
      const auto d = h_r_lower_bound_diag(mu, GroupElement::integer(g), 10'000, 20'000, opts);
      CHECK(d.value <= 1e-3);
      CHECK(d.value >= 0.0);
    }
    const auto oracle = line_survival({{-1, 0.3}, {1, 0.7}}, {0, -1}, {10'000});
    const auto d = h_r_lower_bound_diag(mu, GroupElement::integer(-1), 10'000, 20'000, opts);
    CHECK(std::abs(d.reversed_avoid - oracle[0]) <= 3 * std::sqrt(oracle[0] * (1 - oracle[0]) / 20'000) + 1e-12);
  }
  SUBCASE("directed lattice") {
    // tau_g = infinity iff the first step is (0,1); the reversed walk never returns.
    const auto d = h_r_lower_bound_diag(directed_z2(), GroupElement::lattice({1, 0}), 1000, 100'000, opts);
    CHECK(d.reversed_avoid == 1.0);
    CHECK(std::abs(d.tail - 0.5) <= 0.01);
    CHECK(std::abs(d.value - 0.5 * kLn2) <= 3 * d.ci_half_width);
  }
  SUBCASE("dominated by the exact sequence") {
    const auto mu = f2_asymmetric();
    const auto d = h_r_lower_bound_diag(mu, GroupElement::word({1}), 2000, 50'000, opts);
    CHECK(d.value > 0.0);
    const auto seq = entropy_sequence(mu, 8, {.trace = false});
    for (std::size_t n = 1; n <= 8; ++n) CHECK(seq.h_rs[n] / n >= d.value - d.ci_half_width);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(h_r_lower_bound_diag(z_walk(0.3), GroupElement::integer(3), 10, 10), ValidationError);
  }
}

TEST_CASE("trace upper diagnostic") {
  const McOptions opts{.seed = 53};
  SUBCASE("one step") {
    // |R_1| = 2 and exactly one slot has O = 1: Y = 2 ln 2.
    for (const auto& mu : {z_walk(0.5), f2_uniform(), directed_z2()}) {
      const auto d = trace_upper_diagnostic(mu, 1, 1000, opts);
      CHECK(d.mean == doctest::Approx(2 * kLn2).epsilon(1e-14));
      CHECK(d.mean <= 2 * kLn2 * static_cast<double>(mu.size()));
    }
    // A zero step leaves |R_1| = 1 and Y = 0.
    const auto lazy = trace_upper_diagnostic(z_long_jumps(), 1, 20'000, opts);
    CHECK(std::abs(lazy.mean - 0.8 * 2 * kLn2) <= 4 * lazy.stderr_);
  }
  SUBCASE("symmetric walk decreases") {
    const auto small = trace_upper_diagnostic(z_walk(0.5), 100, 2000, opts);
    const auto large = trace_upper_diagnostic(z_walk(0.5), 10'000, 500, opts);
    CHECK(large.mean <= 0.2);
    CHECK(large.mean < small.mean);
  }
  SUBCASE("y term") {
    CHECK(y_term(0, 10) == 0.0);
    CHECK(y_term(5, 1) == 0.0);
    CHECK(y_term(1, 2) == doctest::Approx(2 * kLn2).epsilon(1e-15));
    // Y dominates ln C(a + k - 1, k - 1).
    std::mt19937_64 gen(8);
    for (int i = 0; i < 10'000; ++i) {
      const std::uint64_t a = 1 + gen() % 5000, k = 1 + gen() % 5000;
      const double lbinom = std::lgamma(static_cast<double>(a + k)) - std::lgamma(static_cast<double>(a + 1)) -
                            std::lgamma(static_cast<double>(k));
      CHECK(lbinom <= y_term(a, k) + 1e-9 * (1 + y_term(a, k)));
    }
  }
  CHECK_THROWS_AS(trace_upper_diagnostic(z_walk(0.5), 0, 10), ValidationError);
}

TEST_CASE("binomial marginals") {
  const McOptions opts{.seed = 61};
  const auto mu = z_walk(0.5);
  const auto plus = *mu.slot_of(GroupElement::integer(1));
  const auto fit = binomial_marginal_check(mu, 20, 100'000, plus, opts);
  CHECK(fit.passes());
  CHECK(fit.p_value > 1e-3);
  CHECK(fit.degrees_of_freedom >= 10);

  const auto one = binomial_marginal_check(z_walk(0.3), 1, 100'000, *z_walk(0.3).slot_of(GroupElement::integer(1)), opts);
  REQUIRE(one.frequencies.size() == 2);
  CHECK(std::abs(one.frequencies[1] - 0.3) <= 4 * std::sqrt(0.21 / 100'000));

  const auto zero = binomial_marginal_check(mu, 0, 100, plus, opts);
  REQUIRE(zero.frequencies.size() == 1);
  CHECK(zero.frequencies[0] == 1.0);
  CHECK(zero.p_value == 1.0);

  // Counts over the two slots add up to n on every path: the histograms are mirror images.
  const auto minus = *mu.slot_of(GroupElement::integer(-1));
  const auto a = binomial_marginal_check(mu, 15, 5000, plus, opts);
  const auto b = binomial_marginal_check(mu, 15, 5000, minus, opts);
  for (std::size_t k = 0; k <= 15; ++k) CHECK(a.frequencies[k] == b.frequencies[15 - k]);

  CHECK_THROWS_AS(binomial_marginal_check(mu, 5, 10, 7, opts), ValidationError);
}

TEST_CASE("csv output") {
  std::ostringstream out;
  const std::vector<McRow> rows = {{"escape", 10000, 1000000, 0.4, 0.001, "truncated", 7},
                                   {"range", 8, 100000, 1.25, 0.5, "plug-in", 0}};
  write_mc_csv(out, rows);
  CHECK(out.str() ==
        "target,n,samples,estimate,stderr,method,seed\n"
        "escape,10000,1000000,0.40000000000000002,0.001,truncated,7\n"
        "range,8,100000,1.25,0.5,plug-in,0\n");
}
