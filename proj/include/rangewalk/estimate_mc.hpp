#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rangewalk/dist_exact.hpp"
#include "rangewalk/groups.hpp"
#include "rangewalk/rng.hpp"

namespace rangewalk {

/// Sample layout. Samples are split into `streams` contiguous blocks; block j
/// draws from substream (seed, j). Results are merged in block order, so they
/// depend on (seed, streams) but never on `workers`.
struct McOptions {
  std::uint64_t seed = 0;
  std::size_t streams = 64;
  std::size_t workers = 0;
};

enum class EntropyMethod { PlugIn, MillerMadow };
std::string_view to_string(EntropyMethod m);

struct EntropyEstimate {
  double value = 0.0;  // per `method`
  double plug_in = 0.0;
  double miller_madow = 0.0;
  /// Delete-one-block jackknife over the sample streams.
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t distinct = 0;
  EntropyMethod method = EntropyMethod::PlugIn;
};

/// Plug-in entropy of a count vector (zeros ignored).
double plug_in_entropy(std::span<const std::uint64_t> counts);
/// Plug-in plus (K - 1) / (2N), K = number of nonzero counts.
double miller_madow_entropy(std::span<const std::uint64_t> counts);

/// Entropy of the outcome (range, range+endpoint, trace, trace+endpoint) of
/// n-step walks from canonical-key counts.
EntropyEstimate mc_entropy(const StepDistribution& mu, std::size_t n, std::uint64_t samples, Outcome target,
                           const McOptions& options = {}, EntropyMethod method = EntropyMethod::PlugIn);

struct HittingEstimate {
  double estimate = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t samples = 0;
  /// 1.96 sqrt(p(1-p)/samples).
  double ci_half_width = 0.0;
};

/// P(S_k not in targets for 1 <= k <= N) for every N in `horizons`, all from
/// the same sample paths (so the estimates are non-increasing in N).
std::vector<HittingEstimate> avoidance_tail(const StepDistribution& mu, std::span<const GroupElement> targets,
                                            std::span<const std::uint64_t> horizons, std::uint64_t samples,
                                            const McOptions& options = {});

/// P(S_k != e, 1 <= k <= N), an upper bound for the escape rate.
HittingEstimate escape_rate(const StepDistribution& mu, std::uint64_t horizon, std::uint64_t samples,
                            const McOptions& options = {});
std::vector<HittingEstimate> escape_rate(const StepDistribution& mu, std::span<const std::uint64_t> horizons,
                                         std::uint64_t samples, const McOptions& options = {});

/// P(tau_x > N), tau_x = inf{n >= 1 : S_n = x}.
HittingEstimate hitting_tail(const StepDistribution& mu, const GroupElement& x, std::uint64_t horizon,
                             std::uint64_t samples, const McOptions& options = {});
std::vector<HittingEstimate> hitting_tail(const StepDistribution& mu, const GroupElement& x,
                                          std::span<const std::uint64_t> horizons, std::uint64_t samples,
                                          const McOptions& options = {});

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double ci_half_width = 0.0;  // 1.96 stderr
  std::uint64_t samples = 0;
};

/// Sample mean of |R_n| / n.
MeanEstimate mean_range_rate(const StepDistribution& mu, std::size_t n, std::uint64_t samples,
                             const McOptions& options = {});

/// Factors known in closed form, replacing the Monte Carlo estimates.
struct ExactFactors {
  std::optional<double> tail;    // P(tau_{a^-1} = infinity)
  std::optional<double> escape;  // gamma_escape
};

struct TraceLowerBound {
  double c = 0.0;
  double ci_half_width = 0.0;
  double entropy_factor = 0.0;  // -mu(a) ln mu(a)
  double tail = 0.0;
  double escape = 0.0;
  std::uint64_t horizon = 0;
  /// True when a factor was estimated at a finite horizon; truncated
  /// estimates can only overstate c.
  bool truncated = false;
};

/// c = -mu(a) ln mu(a) P(tau_{a^-1} = infinity) gamma_escape.
TraceLowerBound h_gamma_lower_bound(const StepDistribution& mu, const GroupElement& a, std::uint64_t horizon,
                                    std::uint64_t samples, const McOptions& options = {},
                                    const ExactFactors& exact = {});

struct RangeLowerDiagnostic {
  double value = 0.0;
  double ci_half_width = 0.0;
  double tail = 0.0;            // P(tau_g > N)
  double reversed_avoid = 0.0;  // reversed walk avoids e and g up to N
  std::uint64_t horizon = 0;
};

/// -P(tau_g = inf) P~(tau~_e = tau~_g = inf) ln(1 - mu(g)) at a finite
/// horizon. Soft diagnostic: truncation biases it upward.
RangeLowerDiagnostic h_r_lower_bound_diag(const StepDistribution& mu, const GroupElement& g, std::uint64_t horizon,
                                          std::uint64_t samples, const McOptions& options = {});

/// (1/n) sum_i E Y_n^i with Y = O ln(1 + (|R|-1)/O) + (|R|-1) ln(1 + O/(|R|-1))
/// summed over support points; terms with O = 0 or |R| = 1 are 0.
MeanEstimate trace_upper_diagnostic(const StepDistribution& mu, std::size_t n, std::uint64_t samples,
                                    const McOptions& options = {});

/// Y for one (O, |R|) pair.
double y_term(std::uint64_t o, std::uint64_t range_size);

struct BinomialFit {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  /// Empirical frequency of each count 0..n.
  std::vector<double> frequencies;
  bool passes(double alpha = 1e-3) const { return p_value > alpha; }
};

/// Chi-square fit of the counts O_n^i of support slot `slot` against
/// Binomial(n, mu(g_slot)); cells with expected count < 5 are pooled.
BinomialFit binomial_marginal_check(const StepDistribution& mu, std::size_t n, std::uint64_t samples,
                                    std::size_t slot, const McOptions& options = {});

/// One line of the Monte Carlo CSV.
struct McRow {
  std::string target;
  std::size_t n = 0;
  std::uint64_t samples = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::string method;
  std::uint64_t seed = 0;
};

/// Header "target,n,samples,estimate,stderr,method,seed".
void write_mc_csv(std::ostream& out, std::span<const McRow> rows);

}  // namespace rangewalk
