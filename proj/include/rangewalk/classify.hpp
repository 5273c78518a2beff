#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rangewalk/dist_exact.hpp"
#include "rangewalk/estimate_mc.hpp"
#include "rangewalk/groups.hpp"

namespace rangewalk {

enum class WalkClassKind { Recurrent, TransientNoLeftJump, TransientOther, Unknown };
std::string_view to_string(WalkClassKind kind);

struct WalkClass {
  WalkClassKind kind = WalkClassKind::Unknown;
  /// Set for TransientNoLeftJump: supp mu within {a^-1, e, a, a^2, ...},
  /// mu(a^-1) > 0 and sum_i i mu(a^i) < 0.
  std::optional<GroupElement> witness;
  /// Criteria applied, in order.
  std::vector<std::string> evidence;
  /// Truncated escape estimate, when requested or when the table is silent.
  std::optional<HittingEstimate> escape;
};

/// Witness a in {+1, -1} times the gcd of the support (the generator of the
/// subgroup the walk lives on). Throws UnsupportedError off the integer line.
std::optional<GroupElement> detect_no_left_jump(const StepDistribution& mu);

struct ClassifyOptions {
  /// Attach a Monte Carlo escape estimate even when the table decides.
  bool mc_evidence = false;
  std::uint64_t horizon = 10'000;
  std::uint64_t samples = 100'000;
  McOptions mc;
};

WalkClass classify(const StepDistribution& mu, const ClassifyOptions& options = {});

struct VanishingPrediction {
  bool h_r_zero = false;
  bool h_gamma_zero = false;
};

/// h_R = 0 iff Recurrent or TransientNoLeftJump; h_Gamma = 0 iff Recurrent.
/// Throws UnsupportedError for Unknown.
VanishingPrediction predict_vanishing(const WalkClass& cls);

/// A homomorphism phi to the integers, positive on every support point. On
/// the integer line and lattices phi(x) = <w, x>; on free groups phi adds
/// w_j for each letter +j and subtracts it for each letter -j.
struct Grading {
  std::vector<std::int64_t> weights;
  std::int64_t operator()(const GroupElement& x) const;
};

/// Searches small integer weight vectors; nullopt when none is found.
std::optional<Grading> find_positive_grading(const StepDistribution& mu);

struct GammaOneReport {
  Grading grading;
  std::size_t n_max = 0;
  std::vector<double> h_r;   // index n
  std::vector<double> h_rs;  // index n
  double step_entropy = 0.0;
  /// max_n max(|H(R_n) - n H(X_1)|, |H(R_n,S_n) - n H(X_1)|)
  double max_deviation = 0.0;
  std::size_t sampled = 0;
  std::size_t reconstructed = 0;
  bool ok = false;
};

struct GammaOneOptions {
  ExactOptions exact;
  double tolerance = 1e-9;
  std::size_t trajectories = 1000;
  /// Length of the sampled trajectories; 0 means n_max.
  std::size_t trajectory_length = 0;
  std::uint64_t seed = 0;
};

/// Exact H(R_n) = H(R_n,S_n) = n H(X_1) for n <= n_max and recovery of sampled
/// paths from their ranges (sort by grading, read off the steps). Throws
/// UnsupportedError when no grading certificate is found.
GammaOneReport check_gamma_escape_one(const StepDistribution& mu, std::size_t n_max,
                                      const GammaOneOptions& options = {});

/// Rebuilds the steps of a walk from its range under a strictly positive grading.
std::vector<GroupElement> reconstruct_steps(const Group& group, const Grading& grading,
                                            std::vector<GroupElement> range);

struct ReportCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct TheoremReport {
  WalkClass walk_class;
  std::optional<VanishingPrediction> prediction;
  /// h_R = H(X_1), predicted when a grading certificate exists.
  bool h_r_equals_step_entropy = false;
  std::vector<double> rs_rate;  // H(R_n,S_n)/n, index n (entry 0 unused)
  std::vector<double> gs_rate;  // H(Gamma_n,S_n)/n, empty without trace tracks
  std::optional<double> trace_lower_bound;
  std::vector<ReportCheck> checks;

  bool ok() const;
};

struct TrendOptions {
  /// Margin for strict decrease under doubling.
  double margin = 1e-9;
  double tolerance = 1e-9;
};

/// Checks the finite-n sequence against the predictions: the lower bound
/// H(Gamma_n,S_n)/n >= c on every n when h_Gamma > 0, strict decrease from
/// m = floor(n_max/2) to 2m when an entropy is predicted to vanish, and
/// H(R_n,S_n)/n = H(X_1) when gamma_escape = 1 is certified.
TheoremReport trend_report(const StepDistribution& mu, const EntropySequence& seq, const WalkClass& cls,
                           std::optional<double> trace_lower_bound = std::nullopt, const TrendOptions& options = {});

}  // namespace rangewalk
