#include "doctest.h"

#include <random>
#include <set>

#include "rangewalk/error.hpp"
#include "rangewalk/groups.hpp"

using namespace rangewalk;

namespace {

// random canonical element, built by multiplying random generators
GroupElement random_element(const Group& g, std::mt19937_64& rng) {
  GroupElement x = g.identity();
  const int len = static_cast<int>(rng() % 8);
  for (int k = 0; k < len; ++k) x = g.mul(x, g.enumerate(1 + rng() % 12));
  return x;
}

std::vector<Group> sample_groups() {
  return {Group(GroupDescriptor::integer_line()), Group(GroupDescriptor::lattice(2)),
          Group(GroupDescriptor::lattice(3)), Group(GroupDescriptor::free_group(2)),
          Group(GroupDescriptor::free_group(3)), Group(GroupDescriptor::cyclic_product({4, 6}))};
}

}  // namespace

TEST_CASE("mul examples") {
  Group z(GroupDescriptor::integer_line());
  CHECK(z.mul(GroupElement::integer(2), GroupElement::integer(3)) == GroupElement::integer(5));

  Group f2(GroupDescriptor::free_group(2));
  auto ab = GroupElement::word({1, -2});
  auto ba = GroupElement::word({2, 1});
  CHECK(f2.mul(ab, ba) == GroupElement::word({1, 1}));

  Group c4(GroupDescriptor::cyclic_product({4}));
  CHECK(c4.mul(GroupElement::residues({3}), GroupElement::residues({2})) == GroupElement::residues({1}));
}

TEST_CASE("mixing groups is rejected") {
  Group z(GroupDescriptor::integer_line());
  CHECK_THROWS_AS(z.mul(GroupElement::integer(1), GroupElement::word({1})), DescriptorMismatch);
  Group f2(GroupDescriptor::free_group(2));
  CHECK_THROWS_AS(f2.validate(GroupElement::word({3})), DescriptorMismatch);
  CHECK_THROWS_AS(f2.validate(GroupElement::word({1, -1})), ValidationError);
}

TEST_CASE("inverse examples") {
  Group z(GroupDescriptor::integer_line());
  CHECK(z.inverse(GroupElement::integer(5)) == GroupElement::integer(-5));
  Group f2(GroupDescriptor::free_group(2));
  CHECK(f2.inverse(GroupElement::word({1, 2})) == GroupElement::word({-2, -1}));
  Group c4(GroupDescriptor::cyclic_product({4}));
  CHECK(c4.inverse(GroupElement::residues({3})) == GroupElement::residues({1}));
}

TEST_CASE("enumeration examples") {
  Group z(GroupDescriptor::integer_line());
  const std::int64_t expect[] = {0, 1, -1, 2, -2};
  for (std::uint64_t i = 0; i < 5; ++i) CHECK(z.enumerate(i) == GroupElement::integer(expect[i]));

  Group c3(GroupDescriptor::cyclic_product({3}));
  for (std::int64_t i = 0; i < 3; ++i) CHECK(c3.enumerate(i) == GroupElement::residues({i}));
  CHECK_THROWS_AS(c3.enumerate(3), ValidationError);

  Group f1(GroupDescriptor::free_group(1));
  CHECK(f1.enumerate(0) == GroupElement::word({}));
  CHECK(f1.enumerate(1) == GroupElement::word({1}));
  CHECK(f1.enumerate(2) == GroupElement::word({-1}));
  CHECK(f1.enumerate(3) == GroupElement::word({1, 1}));
  CHECK(f1.enumerate(4) == GroupElement::word({-1, -1}));

  Group f2(GroupDescriptor::free_group(2));
  CHECK(f2.enumerate(1) == GroupElement::word({1}));
  CHECK(f2.enumerate(2) == GroupElement::word({-1}));
  CHECK(f2.enumerate(3) == GroupElement::word({2}));
  CHECK(f2.enumerate(4) == GroupElement::word({-2}));
  CHECK(f2.enumerate(5) == GroupElement::word({1, 1}));
  CHECK(f2.enumerate(6) == GroupElement::word({1, 2}));

  Group z2(GroupDescriptor::lattice(2));
  CHECK(z2.enumerate(0) == GroupElement::lattice({0, 0}));
  CHECK(z2.enumerate(1) == GroupElement::lattice({-1, -1}));
  CHECK(z2.enumerate(8) == GroupElement::lattice({1, 1}));
  CHECK(z2.enumerate(9) == GroupElement::lattice({-2, -2}));
}

TEST_CASE("enumeration is a bijection on a prefix") {
  for (const auto& g : sample_groups()) {
    const std::uint64_t limit = g.order() ? *g.order() : 10000;
    std::set<GroupElement> seen;
    for (std::uint64_t i = 0; i < limit; ++i) {
      const auto x = g.enumerate(i);
      g.validate(x);
      CHECK(seen.insert(x).second);
      CHECK(g.index_of(x) == i);
    }
    CHECK(g.is_identity(g.enumerate(0)));
  }
}

TEST_CASE("lattice enumeration walks shells in order") {
  Group z3(GroupDescriptor::lattice(3));
  std::uint64_t prev = 0;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const auto r = z3.norm(z3.enumerate(i));
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("group laws on random triples") {
  std::mt19937_64 rng(7);
  for (const auto& g : sample_groups()) {
    for (int t = 0; t < 10000; ++t) {
      const auto a = random_element(g, rng);
      const auto b = random_element(g, rng);
      const auto c = random_element(g, rng);
      REQUIRE(g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c)));
      REQUIRE(g.mul(a, g.identity()) == a);
      REQUIRE(g.mul(g.identity(), a) == a);
      REQUIRE(g.is_identity(g.mul(a, g.inverse(a))));
      REQUIRE(g.is_identity(g.mul(g.inverse(a), a)));
      auto d = a;
      g.mul_in_place(d, b);
      REQUIRE(d == g.mul(a, b));
    }
  }
}

TEST_CASE("step distribution validation") {
  const auto z = GroupDescriptor::integer_line();
  CHECK_THROWS_AS(StepDistribution(z, {{GroupElement::integer(1), 1.0}}), ValidationError);
  CHECK_THROWS_AS(StepDistribution(z, {{GroupElement::integer(1), 0.5}, {GroupElement::integer(1), 0.5}}),
                  ValidationError);
  CHECK_THROWS_AS(StepDistribution(z, {{GroupElement::integer(1), 0.5}, {GroupElement::integer(-1), 0.6}}),
                  ValidationError);
  CHECK_THROWS_AS(StepDistribution(z, {{GroupElement::integer(1), 1.0}, {GroupElement::integer(-1), 0.0}}),
                  ValidationError);
  StepDistribution ok(z, {{GroupElement::integer(1), 0.3}, {GroupElement::integer(-1), 0.7}});
  CHECK(ok.probability(GroupElement::integer(-1)) == doctest::Approx(0.7));
  CHECK(ok.probability(GroupElement::integer(2)) == 0.0);
  CHECK(ok.entropy() == doctest::Approx(-(0.3 * std::log(0.3) + 0.7 * std::log(0.7))).epsilon(1e-14));
}

TEST_CASE("exact rational distributions") {
  const auto z = GroupDescriptor::integer_line();
  auto mu = StepDistribution::from_exact(z, std::vector<std::pair<GroupElement, Rational>>{{GroupElement::integer(1), Rational(3, 10)},
                                                                         {GroupElement::integer(-1), Rational(7, 10)}});
  REQUIRE(mu.has_exact());
  CHECK(mu.exact()[0] == Rational(7, 10));
  CHECK_THROWS_AS(StepDistribution::from_exact(z, std::vector<std::pair<GroupElement, Rational>>{
                                          {GroupElement::integer(1), Rational(3, 10)},
                                          {GroupElement::integer(-1), Rational(6, 10)}}),
                  ValidationError);
  CHECK(parse_rational("0.7") == Rational(7, 10));
  CHECK(parse_rational("3/8") == Rational(3, 8));
  CHECK(rational_from_double(0.7) == Rational(7, 10));
}

TEST_CASE("reversed measure") {
  const auto z = GroupDescriptor::integer_line();
  StepDistribution mu(z, {{GroupElement::integer(1), 0.3}, {GroupElement::integer(-1), 0.7}});
  StepDistribution expect(z, {{GroupElement::integer(-1), 0.3}, {GroupElement::integer(1), 0.7}});
  CHECK(reversed_measure(mu) == expect);
  CHECK(reversed_measure(reversed_measure(mu)) == mu);

  StepDistribution sym(z, {{GroupElement::integer(1), 0.5}, {GroupElement::integer(-1), 0.5}});
  CHECK(reversed_measure(sym) == sym);

  const auto f2 = GroupDescriptor::free_group(2);
  StepDistribution ab(f2, {{GroupElement::word({1}), 0.5}, {GroupElement::word({2}), 0.5}});
  StepDistribution inv(f2, {{GroupElement::word({-1}), 0.5}, {GroupElement::word({-2}), 0.5}});
  CHECK(reversed_measure(ab) == inv);
}

TEST_CASE("support generation sanity check") {
  const auto z = GroupDescriptor::integer_line();
  CHECK(*StepDistribution(z, {{GroupElement::integer(2), 0.5}, {GroupElement::integer(-2), 0.5}})
             .support_generates() == false);
  CHECK(*StepDistribution(z, {{GroupElement::integer(2), 0.5}, {GroupElement::integer(-3), 0.5}})
             .support_generates() == true);
  const auto z2 = GroupDescriptor::lattice(2);
  CHECK(*StepDistribution(z2, {{GroupElement::lattice({1, 0}), 0.5}, {GroupElement::lattice({0, 1}), 0.5}})
             .support_generates() == true);
  CHECK(*StepDistribution(z2, {{GroupElement::lattice({1, 1}), 0.5}, {GroupElement::lattice({1, -1}), 0.5}})
             .support_generates() == false);
  CHECK_FALSE(StepDistribution(GroupDescriptor::free_group(2),
                               {{GroupElement::word({1}), 0.5}, {GroupElement::word({2}), 0.5}})
                  .support_generates()
                  .has_value());
}

TEST_CASE("format") {
  Group f2(GroupDescriptor::free_group(2));
  CHECK(f2.format(GroupElement::word({})) == "e");
  CHECK(f2.format(GroupElement::word({1, -2})) == "aB");
  Group z2(GroupDescriptor::lattice(2));
  CHECK(z2.format(GroupElement::lattice({1, -2})) == "(1,-2)");
}
