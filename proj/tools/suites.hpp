#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rangewalk/dist_exact.hpp"
#include "rangewalk/groups.hpp"

namespace rangewalk::cli {

struct NamedMeasure {
  std::string name;
  StepDistribution mu;
};

/// symmetric-Z, drifted-Z (0.3 up / 0.7 down), F2-uniform, directed-Z2.
std::vector<NamedMeasure> test_measures();
/// F2 with a: 0.4, A: 0.1, b: 0.3, B: 0.2.
NamedMeasure asymmetric_f2();
/// One or more measures on every group kind.
std::vector<NamedMeasure> codec_measures();

struct SuiteResult {
  std::string name;
  bool passed = true;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

/// H_{n+m} <= H_n + H_m on the (R,S) and (Gamma,S) tracks.
SuiteResult subadditivity_suite(const EntropySequence& seq, double tolerance = 1e-9);

/// H(R_n) <= H(R_n,S_n) <= H(R_n) + ln(n+1) and H(R_n,S_n) <= n H(X_1), with
/// 1e-12 slack for double rounding.
SuiteResult sandwich_suite(const StepDistribution& mu, const EntropySequence& seq);

/// TV(law(S_n^-1 R_n), law(R~_n)) <= tolerance for n <= n_max.
SuiteResult reversal_suite(const StepDistribution& mu, std::size_t n_max, const ExactOptions& options = {},
                           double tolerance = 1e-9);

/// Random (p, alpha) cases for sum p ln^alpha(1/p) <= (alpha v ln n)^alpha + (alpha-1)^alpha.
SuiteResult lemma31_suite(std::size_t cases, std::uint64_t seed);

/// Random laws on {1, 2, ...} for H(Y) <= C + 2 E ln Y, and E ln Y <= H(Y)
/// when p is non-increasing; also the certified value of C.
SuiteResult lemma61_suite(std::size_t cases, std::uint64_t seed);

/// H(R_n) >= -(E|boundary| - 1) ln(1 - mu(g)) for every support point g != e
/// and n <= seq.n_max(); the conditional ln^2 moment bound for n <= cond_n_max.
SuiteResult boundary_suite(const StepDistribution& mu, const EntropySequence& seq, std::size_t cond_n_max,
                           const ExactOptions& options = {});

/// -ln q_n(R_n,S_n)/n on sampled trajectories. With a grading certificate
/// every value must equal H(X_1).
SuiteResult aep_suite(const StepDistribution& mu, std::size_t n, std::size_t trajectories, std::uint64_t seed,
                      const ExactOptions& options = {});

/// Round trip decode(encode(G)) = G and key injectivity on sampled traces
/// with 1 <= n <= max_n, plus equal entropies of structural and code keys at
/// n = entropy_n.
SuiteResult codec_suite(const std::vector<NamedMeasure>& measures, std::size_t trajectories, std::size_t max_n,
                        std::uint64_t seed, std::size_t entropy_n = 6);

}  // namespace rangewalk::cli
