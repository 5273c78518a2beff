#include "doctest.h"

#include "rangewalk/error.hpp"
#include "rangewalk/walk.hpp"

using namespace rangewalk;

namespace {

Trajectory z_path(std::initializer_list<std::int64_t> steps) {
  Group z(GroupDescriptor::integer_line());
  std::vector<GroupElement> xs;
  for (auto s : steps) xs.push_back(GroupElement::integer(s));
  return trajectory_from_steps(z, xs);
}

std::uint64_t weight(const TraceDigraph& t, std::int64_t x, std::int64_t y) {
  auto it = t.weights().find({GroupElement::integer(x), GroupElement::integer(y)});
  return it == t.weights().end() ? 0 : it->second;
}

StepDistribution simple_z(double p) {
  return StepDistribution(GroupDescriptor::integer_line(),
                          {{GroupElement::integer(1), p}, {GroupElement::integer(-1), 1 - p}});
}

}  // namespace

TEST_CASE("sample_trajectory basics") {
  const auto mu = simple_z(0.5);
  auto t = sample_trajectory(mu, 0, {1, 0});
  REQUIRE(t.positions.size() == 1);
  CHECK(mu.group().is_identity(t.positions[0]));

  CHECK_THROWS_AS(StepDistribution(GroupDescriptor::integer_line(), {{GroupElement::integer(1), 1.0}}),
                  ValidationError);
}

TEST_CASE("sampling is reproducible and unbiased") {
  const auto mu = simple_z(0.5);
  const auto a = sample_trajectory(mu, 1000000, {42, 3});
  const auto b = sample_trajectory(mu, 1000000, {42, 3});
  CHECK(a.steps == b.steps);
  std::size_t ups = 0;
  for (const auto& x : a.steps) ups += x.value() == 1;
  // 0.002 is about four binomial standard deviations at n = 10^6
  CHECK(std::abs(static_cast<double>(ups) / 1e6 - 0.5) < 0.002);
  const auto c = sample_trajectory(mu, 1000, {42, 4});
  CHECK_FALSE(std::equal(c.steps.begin(), c.steps.end(), a.steps.begin()));
}

TEST_CASE("range and trace examples") {
  Group z(GroupDescriptor::integer_line());
  {
    const auto t = z_path({1, -1});
    const auto r = range_of(z, t);
    CHECK(r.size() == 2);
    CHECK(r.contains(GroupElement::integer(0)));
    CHECK(r.contains(GroupElement::integer(1)));
    CHECK(r.endpoint() == GroupElement::integer(0));
    const auto g = trace_of(z, t);
    CHECK(g.vertices().size() == 2);
    CHECK(g.weights().size() == 2);
    CHECK(weight(g, 0, 1) == 1);
    CHECK(weight(g, 1, 0) == 1);
  }
  {
    const auto t = z_path({1, 1, -1});
    const auto r = range_of(z, t);
    CHECK(r.size() == 3);
    CHECK(r.endpoint() == GroupElement::integer(1));
    const auto g = trace_of(z, t);
    CHECK(weight(g, 0, 1) == 1);
    CHECK(weight(g, 1, 2) == 1);
    CHECK(weight(g, 2, 1) == 1);
  }
  {
    const auto g = trace_of(z, z_path({1, -1, 1, -1}));
    CHECK(weight(g, 0, 1) == 2);
    CHECK(weight(g, 1, 0) == 2);
    CHECK(g.steps() == 4);
  }
}

TEST_CASE("integer range leaves interval form on a gap") {
  Group z(GroupDescriptor::integer_line());
  IncrementalWalk w(z);
  w.step(GroupElement::integer(1));
  CHECK(w.range().is_interval());
  w.step(GroupElement::integer(3));
  CHECK_FALSE(w.range().is_interval());
  CHECK(w.range().size() == 3);
  CHECK_FALSE(w.range().contains(GroupElement::integer(2)));
  w.step(GroupElement::integer(-2));
  CHECK(w.range().contains(GroupElement::integer(2)));
  CHECK(w.range().key(true) == range_of(z, z_path({1, 3, -2})).key(true));
  // the key only depends on the set
  CHECK(w.range().key(false) == range_key(std::vector<GroupElement>{
                                    GroupElement::integer(0), GroupElement::integer(1), GroupElement::integer(2),
                                    GroupElement::integer(4)}));
}

TEST_CASE("reversed trajectory") {
  Group z(GroupDescriptor::integer_line());
  const auto r = reversed_trajectory(z, z_path({1, 2}));
  CHECK(r.steps == std::vector<GroupElement>{GroupElement::integer(-1), GroupElement::integer(-2)});
  CHECK(r.positions ==
        std::vector<GroupElement>{GroupElement::integer(0), GroupElement::integer(-1), GroupElement::integer(-3)});

  Group f2(GroupDescriptor::free_group(2));
  const auto t = trajectory_from_steps(f2, {GroupElement::word({1}), GroupElement::word({2})});
  const auto rt = reversed_trajectory(f2, t);
  CHECK(rt.steps == std::vector<GroupElement>{GroupElement::word({-1}), GroupElement::word({-2})});
  CHECK(rt.positions.back() == GroupElement::word({-1, -2}));
}

TEST_CASE("incremental and recomputed states agree") {
  const std::vector<StepDistribution> measures = {
      simple_z(0.3),
      StepDistribution(GroupDescriptor::integer_line(),
                       {{GroupElement::integer(-1), 0.5}, {GroupElement::integer(2), 0.3}, {GroupElement::integer(5), 0.2}}),
      StepDistribution(GroupDescriptor::lattice(2), {{GroupElement::lattice({1, 0}), 0.25},
                                                     {GroupElement::lattice({-1, 0}), 0.25},
                                                     {GroupElement::lattice({0, 1}), 0.25},
                                                     {GroupElement::lattice({0, -1}), 0.25}}),
      StepDistribution(GroupDescriptor::free_group(2),
                       {{GroupElement::word({1}), 0.25}, {GroupElement::word({-1}), 0.25},
                        {GroupElement::word({2}), 0.25}, {GroupElement::word({-2}), 0.25}}),
      StepDistribution(GroupDescriptor::cyclic_product({5}),
                       {{GroupElement::residues({1}), 0.6}, {GroupElement::residues({3}), 0.4}}),
  };
  for (const auto& mu : measures) {
    const auto& g = mu.group();
    for (std::uint64_t s = 0; s < 40; ++s) {
      const auto t = sample_trajectory(mu, 60, {9, s});
      IncrementalWalk w(g);
      for (std::size_t k = 0; k < t.steps.size(); ++k) {
        w.step(t.steps[k]);
        REQUIRE(w.position() == t.positions[k + 1]);
        REQUIRE(w.trace().steps() == k + 1);
        REQUIRE(w.range().size() <= k + 2);
        REQUIRE(w.range().contains(g.identity()));
        REQUIRE(w.trace().generated_by_walk(g.identity()));
      }
      const auto r = range_of(g, t);
      const auto tr = trace_of(g, t);
      CHECK(w.range() == r);
      CHECK(w.range().key(true) == r.key(true));
      CHECK(w.trace() == tr);
      const auto elems = r.elements();
      CHECK(std::vector<GroupElement>(tr.vertices().begin(), tr.vertices().end()) == elems);
    }
  }
}

TEST_CASE("reachability detects a detached vertex") {
  Group z(GroupDescriptor::integer_line());
  auto t = TraceDigraph::start(z);
  t.add_edge(GroupElement::integer(0), GroupElement::integer(1), 1);
  CHECK(t.generated_by_walk(z.identity()));
  t.add_edge(GroupElement::integer(5), GroupElement::integer(6), 1);
  CHECK_FALSE(t.generated_by_walk(z.identity()));
}
