#include "doctest.h"

#include <cmath>
#include <random>

#include "measures.hpp"
#include "rangewalk/classify.hpp"
#include "rangewalk/error.hpp"

using namespace rangewalk;
using namespace rangewalk::testing;

namespace {

StepDistribution line(std::vector<std::pair<std::int64_t, double>> atoms) {
  std::vector<Atom> a;
  for (auto [k, p] : atoms) a.push_back({GroupElement::integer(k), p});
  return StepDistribution(GroupDescriptor::integer_line(), std::move(a));
}

StepDistribution line_exact(const std::vector<std::pair<std::int64_t, Rational>>& atoms) {
  std::vector<std::pair<GroupElement, Rational>> a;
  for (const auto& [k, p] : atoms) a.emplace_back(GroupElement::integer(k), p);
  return StepDistribution::from_exact(GroupDescriptor::integer_line(), std::move(a));
}

StepDistribution lattice(std::size_t d, std::vector<std::pair<std::vector<std::int64_t>, double>> atoms) {
  std::vector<Atom> a;
  for (auto& [x, p] : atoms) a.push_back({GroupElement::lattice(x), p});
  return StepDistribution(GroupDescriptor::lattice(d), std::move(a));
}

StepDistribution free2(std::vector<std::pair<std::vector<std::int64_t>, double>> atoms) {
  std::vector<Atom> a;
  for (auto& [w, p] : atoms) a.push_back({GroupElement::word(w), p});
  return StepDistribution(GroupDescriptor::free_group(2), std::move(a));
}

}  // namespace

TEST_CASE("no-left-jump detection") {
  CHECK(detect_no_left_jump(z_walk(0.3)) == GroupElement::integer(1));
  CHECK(detect_no_left_jump(z_walk(0.7)) == GroupElement::integer(-1));
  CHECK_FALSE(detect_no_left_jump(z_walk(0.5)).has_value());
  CHECK_FALSE(detect_no_left_jump(line({{-2, 0.5}, {1, 0.5}})).has_value());
  // Support {-2, 0, 2, 4}: the walk lives on 2Z and a = 2 is a witness.
  CHECK(detect_no_left_jump(line({{-2, 0.6}, {0, 0.1}, {2, 0.2}, {4, 0.1}})) == GroupElement::integer(2));
  // Drift against a but the jump below is longer than a^-1.
  CHECK_FALSE(detect_no_left_jump(z_long_jumps()).has_value());
  // Skip-free to the left with negative drift after a lazy step.
  CHECK(detect_no_left_jump(line({{-1, 0.6}, {2, 0.2}, {0, 0.2}})) == GroupElement::integer(1));
  CHECK_THROWS_AS(detect_no_left_jump(f2_uniform()), UnsupportedError);
}

TEST_CASE("classification table") {
  auto kind = [](const StepDistribution& mu) { return classify(mu).kind; };
  CHECK(kind(z_walk(0.5)) == WalkClassKind::Recurrent);
  const auto drifted = classify(z_walk(0.3));
  CHECK(drifted.kind == WalkClassKind::TransientNoLeftJump);
  CHECK(drifted.witness == GroupElement::integer(1));
  CHECK_FALSE(drifted.evidence.empty());
  CHECK(kind(f2_uniform()) == WalkClassKind::TransientOther);
  CHECK(kind(f2_asymmetric()) == WalkClassKind::TransientOther);
  CHECK(kind(directed_z2()) == WalkClassKind::TransientOther);
  CHECK(kind(cyclic5()) == WalkClassKind::Recurrent);
  CHECK(kind(z_long_jumps()) == WalkClassKind::TransientOther);

  // Lattices by rank of the support.
  CHECK(kind(lattice(2, {{{1, 0}, 0.25}, {{-1, 0}, 0.25}, {{0, 1}, 0.25}, {{0, -1}, 0.25}})) ==
        WalkClassKind::Recurrent);
  CHECK(kind(lattice(3, {{{1, 0, 0}, 0.25}, {{-1, 0, 0}, 0.25}, {{0, 1, 0}, 0.25}, {{0, -1, 0}, 0.25}})) ==
        WalkClassKind::Recurrent);
  CHECK(kind(lattice(3, {{{1, 0, 0}, 1.0 / 6}, {{-1, 0, 0}, 1.0 / 6}, {{0, 1, 0}, 1.0 / 6}, {{0, -1, 0}, 1.0 / 6},
                         {{0, 0, 1}, 1.0 / 6}, {{0, 0, -1}, 1.0 / 6}})) == WalkClassKind::TransientOther);
  const auto on_axis = classify(lattice(2, {{{2, 2}, 0.3}, {{-1, -1}, 0.7}}));
  CHECK(on_axis.kind == WalkClassKind::TransientNoLeftJump);
  CHECK(on_axis.witness == GroupElement::lattice({1, 1}));

  // Free groups: commuting supports reduce to a cyclic subgroup.
  const auto cyclic_free = classify(free2({{{1}, 0.3}, {{-1}, 0.7}}));
  CHECK(cyclic_free.kind == WalkClassKind::TransientNoLeftJump);
  CHECK(cyclic_free.witness == GroupElement::word({1}));
  CHECK(kind(free2({{{1, 2}, 0.5}, {{-2, -1}, 0.5}})) == WalkClassKind::Recurrent);
  const auto powers = classify(free2({{{2, 1, 1, -2}, 0.3}, {{2, -1, -2}, 0.7}}));
  CHECK(powers.kind == WalkClassKind::TransientNoLeftJump);
  CHECK(powers.witness == GroupElement::word({2, 1, -2}));
}

TEST_CASE("undecidable sign falls back to Monte Carlo evidence") {
  const auto mu = line({{1, 0.5 + 5e-14}, {-1, 0.5 - 5e-14}});
  const auto cls = classify(mu, {.horizon = 1000, .samples = 2000});
  CHECK(cls.kind == WalkClassKind::Unknown);
  REQUIRE(cls.escape.has_value());
  CHECK(cls.escape->horizon == 1000);
  CHECK_THROWS_AS(predict_vanishing(cls), UnsupportedError);
  // Exact rationals decide the same sign question.
  const auto exact = line_exact({{1, Rational(1, 2) + Rational(1, 1000000000) / 10000},
                                 {-1, Rational(1, 2) - Rational(1, 1000000000) / 10000}});
  CHECK(classify(exact).kind == WalkClassKind::TransientNoLeftJump);
}

TEST_CASE("vanishing predictions") {
  WalkClass c;
  c.kind = WalkClassKind::Recurrent;
  CHECK(predict_vanishing(c).h_r_zero);
  CHECK(predict_vanishing(c).h_gamma_zero);
  c.kind = WalkClassKind::TransientNoLeftJump;
  CHECK(predict_vanishing(c).h_r_zero);
  CHECK_FALSE(predict_vanishing(c).h_gamma_zero);
  c.kind = WalkClassKind::TransientOther;
  CHECK_FALSE(predict_vanishing(c).h_r_zero);
  CHECK_FALSE(predict_vanishing(c).h_gamma_zero);
}

TEST_CASE("classification agrees with simulated escape") {
  // Random measures on {-3..3} with probabilities in twentieths; the mean is
  // either exactly zero or at least 0.2 away from it.
  std::mt19937_64 gen(12);
  int recurrent = 0, transient = 0;
  for (int trial = 0; recurrent + transient < 24 && trial < 2000; ++trial) {
    std::vector<std::pair<std::int64_t, Rational>> atoms;
    int left = 20;
    std::vector<std::int64_t> support;
    for (std::int64_t k = -3; k <= 3; ++k) {
      if (gen() % 2) support.push_back(k);
    }
    if (support.size() < 2) continue;
    for (std::size_t i = 0; i < support.size(); ++i) {
      const int w = i + 1 == support.size() ? left : static_cast<int>(gen() % static_cast<unsigned>(left));
      if (w == 0) continue;
      atoms.emplace_back(support[i], Rational(w, 20));
      left -= w;
      if (left == 0) break;
    }
    if (atoms.size() < 2 || left != 0) continue;
    Rational mean = 0;
    for (auto& [k, p] : atoms) mean += p * k;
    const double m = to_double(mean);
    if (m != 0 && std::abs(m) < 0.2) continue;
    if (m == 0 && recurrent >= 12) continue;
    if (m != 0 && transient >= 12) continue;
    const auto mu = line_exact(atoms);
    const auto cls = classify(mu);
    const auto esc = escape_rate(mu, 10'000, 20'000, {.seed = static_cast<std::uint64_t>(trial)});
    CAPTURE(trial);
    if (cls.kind == WalkClassKind::Recurrent) {
      ++recurrent;
      CHECK(m == 0.0);
      CHECK(esc.estimate <= 0.05);
    } else {
      ++transient;
      CHECK(m != 0.0);
      CHECK(esc.estimate > 0.1);
      if (cls.kind == WalkClassKind::TransientNoLeftJump) {
        // The walk hits a^-1 almost surely.
        CHECK(hitting_tail(mu, GroupElement::integer(-cls.witness->value()), 10'000, 20'000).estimate < 0.02);
      }
    }
  }
  CHECK(recurrent == 12);
  CHECK(transient == 12);
}

TEST_CASE("gradings and reconstruction") {
  const auto g = find_positive_grading(directed_z2());
  REQUIRE(g.has_value());
  CHECK((*g)(GroupElement::lattice({1, 0})) > 0);
  CHECK((*g)(GroupElement::lattice({0, 1})) > 0);
  CHECK(find_positive_grading(line({{1, 0.5}, {2, 0.5}})).has_value());
  CHECK(find_positive_grading(line({{-1, 0.5}, {-3, 0.5}}))->weights == std::vector<std::int64_t>{-1});
  CHECK_FALSE(find_positive_grading(z_walk(0.5)).has_value());
  CHECK_FALSE(find_positive_grading(cyclic5()).has_value());
  const auto fg = find_positive_grading(free2({{{1}, 0.5}, {{2, 1, -2}, 0.5}}));
  REQUIRE(fg.has_value());
  CHECK((*fg)(GroupElement::word({2, 1, -2})) > 0);
  CHECK_FALSE(find_positive_grading(f2_uniform()).has_value());

  const Group group(GroupDescriptor::lattice(2));
  const std::vector<GroupElement> steps = {GroupElement::lattice({1, 0}), GroupElement::lattice({0, 1}),
                                           GroupElement::lattice({0, 1})};
  std::vector<GroupElement> range = {GroupElement::lattice({1, 2}), GroupElement::lattice({0, 0}),
                                     GroupElement::lattice({1, 1}), GroupElement::lattice({1, 0})};
  CHECK(reconstruct_steps(group, *g, range) == steps);
}

TEST_CASE("escape rate one certificates") {
  const auto report = check_gamma_escape_one(directed_z2(), 12, {.trajectories = 500, .seed = 3});
  CHECK(report.ok);
  CHECK(report.max_deviation <= 1e-9);
  CHECK(report.reconstructed == 500);
  for (std::size_t n = 0; n <= 12; ++n) CHECK(std::abs(report.h_r[n] - n * std::log(2.0)) <= 1e-9);

  const auto plus = check_gamma_escape_one(line({{1, 0.5}, {2, 0.5}}), 12, {.trajectories = 200});
  CHECK(plus.ok);
  const auto skewed = check_gamma_escape_one(free2({{{1}, 0.3}, {{2}, 0.2}, {{2, 1, -2}, 0.5}}), 6,
                                             {.trajectories = 200, .trajectory_length = 40});
  CHECK(skewed.ok);
  CHECK_THROWS_AS(check_gamma_escape_one(z_walk(0.5), 4), UnsupportedError);
}

TEST_CASE("trend reports") {
  SUBCASE("drifted walk: trace rate above the lower bound") {
    const auto mu = z_walk(0.3);
    const auto seq = entropy_sequence(mu, 12);
    const auto report = trend_report(mu, seq, classify(mu), 0.047);
    CHECK(report.ok());
    REQUIRE(report.prediction.has_value());
    CHECK(report.prediction->h_r_zero);
    CHECK_FALSE(report.prediction->h_gamma_zero);
    bool saw_bound = false;
    for (const auto& c : report.checks) saw_bound |= c.name == "trace-rate-above-lower-bound";
    CHECK(saw_bound);
    // The same check fails against a bound above the sequence.
    CHECK_FALSE(trend_report(mu, seq, classify(mu), 0.9).ok());
  }
  SUBCASE("symmetric walk: both rates decrease") {
    const auto mu = z_walk(0.5);
    const auto seq = entropy_sequence(mu, 12);
    const auto report = trend_report(mu, seq, classify(mu));
    CHECK(report.ok());
    CHECK(report.checks.size() == 2);
    CHECK(report.gs_rate[12] < report.gs_rate[6]);
    CHECK(report.rs_rate[12] < report.rs_rate[6]);
  }
  SUBCASE("directed lattice: constant rate") {
    const auto mu = directed_z2();
    const auto seq = entropy_sequence(mu, 12, {.trace = false});
    const auto report = trend_report(mu, seq, classify(mu));
    CHECK(report.ok());
    CHECK(report.h_r_equals_step_entropy);
    for (std::size_t n = 1; n <= 12; ++n) CHECK(std::abs(report.rs_rate[n] - std::log(2.0)) <= 1e-12);
  }
}
