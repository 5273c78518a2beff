#include "doctest.h"

#include <map>
#include <random>

#include "rangewalk/error.hpp"
#include "rangewalk/trace_codec.hpp"

using namespace rangewalk;

namespace {

TraceDigraph z_trace(std::initializer_list<std::int64_t> steps) {
  Group z(GroupDescriptor::integer_line());
  std::vector<GroupElement> xs;
  for (auto s : steps) xs.push_back(GroupElement::integer(s));
  return trace_of(z, trajectory_from_steps(z, xs));
}

std::vector<StepDistribution> fuzz_measures() {
  return {
      StepDistribution(GroupDescriptor::integer_line(),
                       {{GroupElement::integer(1), 0.5}, {GroupElement::integer(-1), 0.5}}),
      StepDistribution(GroupDescriptor::integer_line(),
                       {{GroupElement::integer(-1), 0.5}, {GroupElement::integer(2), 0.3}, {GroupElement::integer(5), 0.2}}),
      StepDistribution(GroupDescriptor::lattice(2), {{GroupElement::lattice({1, 0}), 0.25},
                                                     {GroupElement::lattice({-1, 0}), 0.25},
                                                     {GroupElement::lattice({0, 1}), 0.25},
                                                     {GroupElement::lattice({0, -1}), 0.25}}),
      StepDistribution(GroupDescriptor::lattice(3), {{GroupElement::lattice({1, 0, 0}), 0.4},
                                                     {GroupElement::lattice({0, 1, 0}), 0.3},
                                                     {GroupElement::lattice({-1, -1, 1}), 0.3}}),
      StepDistribution(GroupDescriptor::free_group(2),
                       {{GroupElement::word({1}), 0.25}, {GroupElement::word({-1}), 0.25},
                        {GroupElement::word({2}), 0.25}, {GroupElement::word({-2}), 0.25}}),
      StepDistribution(GroupDescriptor::cyclic_product({3, 4}),
                       {{GroupElement::residues({1, 0}), 0.5}, {GroupElement::residues({0, 3}), 0.5}}),
  };
}

}  // namespace

TEST_CASE("address ordering") {
  CHECK(VertexAddress{{5}} < VertexAddress{{0, 0}});
  CHECK(VertexAddress{{1, 2}} < VertexAddress{{1, 3}});
  CHECK(VertexAddress{{0, 9}} < VertexAddress{{1, 0}});
  CHECK_FALSE(VertexAddress{{1, 3}} < VertexAddress{{1, 3}});
}

TEST_CASE("encode examples") {
  Group z(GroupDescriptor::integer_line());
  {
    const auto code = encode(TraceDigraph::start(z), z);
    REQUIRE(code.vertex_count() == 1);
    CHECK(code.neighbors[0].empty());
    CHECK(code.weights.empty());
  }
  {
    const auto code = encode(z_trace({1, -1}), z);
    REQUIRE(code.vertex_count() == 2);
    CHECK(code.neighbors[0] == std::vector<std::uint64_t>{1});
    CHECK(code.neighbors[1] == std::vector<std::uint64_t>{2});
    CHECK(code.weights.at({1, 0}) == 1);
    CHECK(code.weights.at({2, 1}) == 1);
    CHECK(code.weights.size() == 2);
  }
  {
    const auto code = encode(z_trace({1, 1}), z);
    REQUIRE(code.vertex_count() == 3);
    CHECK(code.neighbors[0] == std::vector<std::uint64_t>{1});
    CHECK(code.neighbors[1] == std::vector<std::uint64_t>{1});
    CHECK(code.neighbors[2].empty());
    CHECK(code.weights.at({1, 0}) == 1);
    CHECK(code.weights.at({1, 1}) == 1);
  }
}

TEST_CASE("encode visits the smaller address first") {
  // 0 -> 1 -> 0 -> -1: from 0 the children are 1 (address (1)) and -1 (address (2))
  Group z(GroupDescriptor::integer_line());
  const auto code = encode(z_trace({1, -1, -1}), z);
  REQUIRE(code.vertex_count() == 3);
  CHECK(code.neighbors[0] == std::vector<std::uint64_t>{1, 2});
  CHECK(code.neighbors[1] == std::vector<std::uint64_t>{2});
  CHECK(code.neighbors[2].empty());
}

TEST_CASE("unreachable vertex is a structural error") {
  Group z(GroupDescriptor::integer_line());
  auto t = TraceDigraph::start(z);
  t.add_edge(GroupElement::integer(3), GroupElement::integer(4), 1);
  CHECK_THROWS_AS(encode(t, z), StructuralError);
}

TEST_CASE("decode examples") {
  Group z(GroupDescriptor::integer_line());
  CHECK(decode(encode(TraceDigraph::start(z), z), z) == TraceDigraph::start(z));
  const auto t = z_trace({1, -1});
  CHECK(decode(encode(t, z), z) == t);

  TraceCode bad;
  bad.neighbors = {{1}, {}};
  CHECK_THROWS_AS(decode(bad, z), MalformedCode);

  TraceCode early;
  early.neighbors = {{}, {}};
  CHECK_THROWS_AS(decode(early, z), MalformedCode);

  TraceCode late;
  late.neighbors = {{1}};
  late.weights[{1, 0}] = 1;
  CHECK_THROWS_AS(decode(late, z), MalformedCode);
}

TEST_CASE("canonical keys") {
  Group z(GroupDescriptor::integer_line());
  const auto t = z_trace({1, -1, 1, 1});
  CHECK(canonical_key(t, z) == canonical_key(decode(encode(t, z), z), z));
  CHECK(canonical_key(z_trace({1, -1}), z) != canonical_key(z_trace({-1, 1}), z));
  const auto key = canonical_key(z_trace({1}), z);
  CHECK(static_cast<unsigned char>(key[0]) == 0x01);
  // version byte, |A| = 2, (0, 1, 1), (1, 0), 1 triple (1, 0, 1)
  CHECK(key.size() == 1 + 8 + 8 * 3 + 8 * 2 + 8 + 8 * 3);
}

TEST_CASE("round trip and injectivity fuzz") {
  std::mt19937_64 rng(11);
  std::size_t cases = 0;
  for (const auto& mu : fuzz_measures()) {
    const auto& g = mu.group();
    std::map<std::string, std::string> by_key;
    for (std::uint64_t s = 0; s < 2000; ++s) {
      const auto n = 1 + rng() % 300;
      const auto t = trace_of(g, sample_trajectory(mu, n, {17, s}));
      const auto code = encode(t, g);
      REQUIRE(code.vertex_count() == t.vertices().size());
      REQUIRE(decode(code, g) == t);
      const auto key = serialize(code);
      const auto structural = t.structural_key();
      auto [it, fresh] = by_key.emplace(key, structural);
      REQUIRE(it->second == structural);
      ++cases;
    }
  }
  CHECK(cases >= 10000);
}

TEST_CASE("keys separate distinct digraphs") {
  const auto mu = fuzz_measures()[0];
  const auto& g = mu.group();
  std::map<std::string, std::string> structural_to_key;
  std::map<std::string, std::string> key_to_structural;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto t = trace_of(g, sample_trajectory(mu, 8, {23, s}));
    const auto key = canonical_key(t, g);
    const auto st = t.structural_key();
    structural_to_key.emplace(st, key);
    key_to_structural.emplace(key, st);
    REQUIRE(structural_to_key.at(st) == key);
    REQUIRE(key_to_structural.at(key) == st);
  }
  CHECK(structural_to_key.size() == key_to_structural.size());
}
