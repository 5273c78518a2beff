#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "rangewalk/estimate_mc.hpp"
#include "rangewalk/groups.hpp"

namespace rangewalk {

/// A value known to lie in [value - radius, value + radius].
struct Certified {
  double value = 0.0;
  double radius = 0.0;

  double lower() const { return value - radius; }
  double upper() const { return value + radius; }
};

enum class TailShape {
  Power,     // w(k) = k^-s, s > 2
  PowerLog,  // w(k) = 1 / (k^2 ln^b k), b > 1
};

/// Parametric tail p_k = mass * w(k) / Z for k >= start, Z = sum_{k>=start} w(k).
struct TailRule {
  TailShape shape = TailShape::Power;
  double mass = 0.0;
  std::int64_t start = 1;
  double exponent = 3.0;
};

/// Law of X_1 on {-1, 0, 1, 2, ...} with q = P(X_1 = -1) and negative drift.
class SkipFreeMeasure {
 public:
  /// head[k] = P(X_1 = k) for k = 0 .. head.size()-1. A tail, when present,
  /// must start at or beyond head.size(). Throws ValidationError on bad input
  /// and NotEscapingError unless the drift is certified negative.
  SkipFreeMeasure(double q, std::vector<double> head, std::optional<TailRule> tail = std::nullopt);

  /// Normalizes a no-left-jump measure on the integer line by its witness a:
  /// x -> x / a. Throws NotEscapingError when there is no witness.
  static SkipFreeMeasure from_distribution(const StepDistribution& mu);

  double q() const { return q_; }
  std::span<const double> head() const { return head_; }
  const std::optional<TailRule>& tail() const { return tail_; }
  bool finite_support() const { return !tail_.has_value(); }
  /// Largest k with P(X_1 = k) > 0; finite support only.
  std::int64_t max_jump() const;
  /// The witness a used by from_distribution (1 for direct construction).
  std::int64_t witness() const { return witness_; }

  /// m = E X_1.
  Certified drift() const { return drift_; }
  /// P(X_1 = k), k >= -1.
  double p(std::int64_t k) const;
  /// p_{k+} = P(X_1 >= k) for k = 0 .. n.
  std::vector<double> tail_sums(std::size_t n) const;
  /// sum_j p_j j (j+1) / 2 = sum_n n p_{n+}; nullopt when infinite.
  std::optional<Certified> ladder_mean_numerator() const;
  /// Upper bound on sum_j p_j ((j+1) H_j - j) = sum_k p_{k++} / k; nullopt
  /// when infinite.
  std::optional<double> log_moment_bound() const;

 private:
  double tail_weight(std::int64_t k) const;

  double q_;
  std::vector<double> head_;
  std::optional<TailRule> tail_;
  Certified z_;  // normalizer of the tail weights
  Certified drift_;
  std::int64_t witness_ = 1;
};

/// f_0 = P(eta = 0) = -m / q.
double f0(const SkipFreeMeasure& mu);

/// Partial law of eta = sup_n S_n.
struct SupremumLaw {
  std::vector<double> f;  // f[n] = P(eta = n), n = 0 .. N
  /// 1 - sum f_n, computed as a compensated sum and clamped at 0.
  double tail_mass = 0.0;
  /// Upper bound on P(eta > N) including rounding of the recursion.
  double tail_bound = 0.0;

  std::size_t n() const { return f.empty() ? 0 : f.size() - 1; }
};

struct LawOptions {
  /// Cap on multiply-adds of the recursion; ResourceError beyond it.
  double max_work = 2e9;
};

/// f_n = sum_{k=1}^n p_{k+} f_{n-k} / q.
SupremumLaw supremum_law(const SkipFreeMeasure& mu, std::size_t n, const LawOptions& options = {});

/// Largest relative shortfall of f_n below p_{n+} f_0 / q over n = 1..N
/// (zero when the termwise bound holds).
double lower_bound_violation(const SkipFreeMeasure& mu, const SupremumLaw& law);

struct GeneratingRow {
  double t = 0.0;
  double partial = 0.0;       // sum_{n<=N} f_n t^n
  double rational_form = 0.0;  // q f0 (1-t) / (q + t P(t) - t)
  double ladder_form = 0.0;    // q f0 / (q - Pbar(t))
};

struct GeneratingReport {
  std::vector<GeneratingRow> rows;
  /// max |partial - closed form| over both forms and the grid.
  double max_residual = 0.0;
  /// max |rational_form - ladder_form| over the grid.
  double max_form_gap = 0.0;
};

/// Throws PrecisionError when tail_bound * t^(N+1) > 1e-10 at some grid t, and
/// ValidationError for t outside (0, 1).
GeneratingReport check_generating_function(const SkipFreeMeasure& mu, const SupremumLaw& law,
                                           std::span<const double> t_grid);

enum class TailCriterion { Finite, Infinite };
std::string_view to_string(TailCriterion c);

struct TailVerdict {
  /// Status of E[|X_1| ln |X_1|].
  TailCriterion criterion = TailCriterion::Finite;
  /// Predicted finiteness of H(R_inf) = H(eta).
  bool entropy_finite = true;
};

TailVerdict tail_criterion(const SkipFreeMeasure& mu);

struct EtaEntropy {
  double partial = 0.0;  // sum_{n<=N} -f_n ln f_n
  /// Upper bound on the entropy carried by {eta > N}; empty when the tail
  /// criterion fails or no bound applies.
  std::optional<double> tail_bound;
  bool unbounded = false;

  double lower() const { return partial; }
  std::optional<double> upper() const;
};

/// The tail bound conditions on {eta > N}: with T = P(eta > N) and
/// Y = eta - N, the missing mass is T H(Y) - T ln T <= T (C + 2 E ln Y) - T ln T,
/// where E ln Y is bounded by ln E[Y] when E eta is finite and through
/// sum_k p_{k++}/k otherwise.
EtaEntropy entropy_eta(const SkipFreeMeasure& mu, const SupremumLaw& law);

/// H_N - H_{N/2} certified from below by f_n >= p_{n+} f_0 / q.
struct GrowthDiagnostic {
  std::size_t n = 0;
  double lower_bound = 0.0;
  /// False when f_n <= 1/e could not be certified on (N/2, N].
  bool certified = false;
};

GrowthDiagnostic entropy_growth(const SkipFreeMeasure& mu, std::size_t n);

/// C = e^-1 + 2 sum_{n>=2} ln n / n^2, summed to 10^6 with an integral remainder.
Certified lemma61_constant();

struct IntegralBounds {
  double entropy = 0.0;  // H(Y)
  double mean_log = 0.0;  // E ln Y
  Certified c;
  double upper = 0.0;  // C + 2 E ln Y, with C at its upper end
  bool upper_holds = false;
  /// p_n non-increasing on the given range.
  bool decreasing = false;
  /// E ln Y <= H(Y); only asserted when decreasing.
  bool lower_holds = false;
};

/// p[i] = P(Y = i + 1). Throws ValidationError unless p is a probability vector.
IntegralBounds entropy_integral_bounds(std::span<const double> p);

struct SupremumMcReport {
  std::uint64_t samples = 0;
  std::uint64_t horizon = 0;
  /// Empirical law of max_{k<=horizon} S_k on 0..N; the last entry collects values above N.
  std::vector<double> empirical;
  double tv = 0.0;
  /// TV between the law of max{0, X_1 + eta'} (eta' simulated independently) and f.
  double recursion_tv = 0.0;
  /// Estimate of P(eta > max_{k<=horizon} S_k): mean of P(eta' > M - S) at the stop time.
  double bias_bound = 0.0;
};

/// Finite support only (UnsupportedError otherwise). Stream layout and
/// determinism as for the other Monte Carlo estimators.
SupremumMcReport mc_supremum_check(const SkipFreeMeasure& mu, const SupremumLaw& law, std::uint64_t horizon,
                                   std::uint64_t samples, const McOptions& options = {});

/// Header n,f_n,cum,partial_H; %.17g.
void write_ladder_csv(std::ostream& out, const SupremumLaw& law);

}  // namespace rangewalk
