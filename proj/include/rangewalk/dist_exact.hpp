#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rangewalk/groups.hpp"
#include "rangewalk/rational.hpp"
#include "rangewalk/walk.hpp"

namespace rangewalk {

struct ExactOptions {
  /// Maximum number of distinct states held in one DP layer or law table.
  std::size_t state_cap = 10'000'000;
  /// Maximum |supp mu|^n for path enumeration.
  std::uint64_t path_cap = 200'000'000;
  /// Threads for path enumeration; 0 = resolve_workers default.
  std::size_t workers = 0;
  /// Use the (lo, hi, pos) DP on the integer line with steps in {-1, 0, 1}.
  bool interval_dp = true;
  /// When only entropies are needed, a final layer with more children than
  /// this is built in hash partitions of about this size. 0 disables.
  std::size_t partition_budget = 3'000'000;
};

/// Exact law of a discrete outcome: (key, probability) pairs sorted by key.
template <class P>
class LawTable {
 public:
  using Entry = std::pair<std::string, P>;

  LawTable() = default;
  /// Sorts by key; throws ValidationError on duplicate keys or p <= 0.
  explicit LawTable(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  /// Probability of `key`, zero if absent.
  P probability(std::string_view key) const;
  P total() const;

 private:
  std::vector<Entry> entries_;
};

using Law = LawTable<double>;
using ExactLaw = LawTable<Rational>;

extern template class LawTable<double>;
extern template class LawTable<Rational>;

/// Shannon entropy in nats. Terms are summed in ascending-probability order
/// with Neumaier compensation, so equal multisets of probabilities give
/// bit-identical results.
double entropy(const Law& law);
/// Probabilities are rounded to double before the logarithms are taken.
double entropy(const ExactLaw& law);
double entropy_of(std::vector<double> probabilities);

Law to_double(const ExactLaw& law);
double total_variation(const Law& a, const Law& b);

/// What a law table is keyed by.
enum class Outcome {
  RangeEndpoint,  // RangeState::key(true)
  Range,          // RangeState::key(false)
  Trace,          // TraceDigraph::structural_key()
  TraceEndpoint,  // structural key, 'E', endpoint
  Code,           // canonical_key()
  CodeEndpoint,   // canonical key, 'E', endpoint
};

/// Key of one trajectory's outcome.
std::string outcome_key(const Group& group, const IncrementalWalk& walk, Outcome outcome);

/// Engine (a): enumerate all |supp|^n paths and merge by key. Parallel over
/// first-step prefixes; partial tables are merged in prefix order, so the
/// result does not depend on the worker count.
Law law_by_paths(const StepDistribution& mu, std::size_t n, Outcome outcome, const ExactOptions& options = {});
/// Rational arithmetic; requires mu.has_exact().
ExactLaw exact_law_by_paths(const StepDistribution& mu, std::size_t n, Outcome outcome,
                            const ExactOptions& options = {});

/// Engine (b): DP merging identical (R, S) states per step.
Law law_range_endpoint(const StepDistribution& mu, std::size_t n, const ExactOptions& options = {});
ExactLaw exact_law_range_endpoint(const StepDistribution& mu, std::size_t n, const ExactOptions& options = {});
/// Marginal law of R_n.
Law law_range(const StepDistribution& mu, std::size_t n, const ExactOptions& options = {});

/// Engine (b) for Gamma_n, keyed by structural key (plus endpoint when
/// requested). A walk's trace fixes its endpoint (the unique vertex with one
/// more in- than out-edge, or e when balanced), so both laws have the same
/// probabilities.
Law law_trace(const StepDistribution& mu, std::size_t n, bool with_endpoint, const ExactOptions& options = {});
ExactLaw exact_law_trace(const StepDistribution& mu, std::size_t n, bool with_endpoint,
                         const ExactOptions& options = {});

/// One atom of the law of (R_n, S_n).
struct RangeOutcome {
  std::vector<GroupElement> range;  // sorted
  GroupElement endpoint;
  double probability = 0.0;
};

/// The law of (R_n, S_n) as explicit sets.
std::vector<RangeOutcome> range_outcomes(const StepDistribution& mu, std::size_t n, const ExactOptions& options = {});

/// True when the interval DP applies: integer line, steps in {-1, 0, +1}.
bool interval_dp_applies(const StepDistribution& mu);

/// Per-n entropies H(R_n), H(R_n,S_n), H(Gamma_n), H(Gamma_n,S_n).
struct EntropySequence {
  std::vector<double> h_r;
  std::vector<double> h_rs;
  /// Empty when the trace tracks were not computed.
  std::vector<double> h_g;
  std::vector<double> h_gs;
  bool rational = false;

  std::size_t n_max() const { return h_rs.empty() ? 0 : h_rs.size() - 1; }
  bool has_trace() const { return !h_gs.empty(); }
  /// min over 1 <= n <= n_max of H(R_n,S_n)/n, an upper proxy for h. The
  /// rate of approach is unknown, so no tolerance is attached.
  double h_proxy() const;
};

struct SequenceOptions {
  ExactOptions exact;
  bool trace = true;
  /// Rational probabilities in the DP (mu must carry them).
  bool rational = false;
  /// Largest n for the trace tracks; the range tracks go to n_max.
  std::size_t trace_n_max = static_cast<std::size_t>(-1);
};

EntropySequence entropy_sequence(const StepDistribution& mu, std::size_t n_max, const SequenceOptions& options = {});

struct SubadditivityViolation {
  std::string track;  // "RS" or "GS"
  std::size_t n = 0;
  std::size_t m = 0;
  double lhs = 0.0;  // H_{n+m}
  double rhs = 0.0;  // H_n + H_m
};

/// Every split n + m <= n_max on the (R,S) and (Gamma,S) tracks.
std::vector<SubadditivityViolation> check_subadditivity(const EntropySequence& seq, double tolerance = 1e-9);

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

/// sum p_i ln^alpha(1/p_i) against (alpha v ln n)^alpha + (alpha-1)^alpha.
BoundPair lemma31_bound(std::span<const double> p, double alpha);

struct ConditionalEndpointReport {
  std::size_t n = 0;
  double h_endpoint_given_range = 0.0;
  double entropy_bound = 0.0;  // ln(n+1)
  /// max over ranges A of sum_x P(S=x|R=A) ln^2 P(S=x|R=A)
  double max_ln2_moment = 0.0;
  double ln2_bound = 0.0;  // ln^2(n+1) + 5
  bool ok = false;
};

ConditionalEndpointReport conditional_endpoint_diagnostics(const StepDistribution& mu, std::size_t n,
                                                           const ExactOptions& options = {});
/// The same report for every n <= n_max from one pass of the range DP.
std::vector<ConditionalEndpointReport> conditional_endpoint_sequence(const StepDistribution& mu, std::size_t n_max,
                                                                     const ExactOptions& options = {});

struct BoundaryReport {
  std::size_t n = 0;
  double expected_boundary = 0.0;  // E|{x in R_n : xg not in R_n}|
  double bound = 0.0;              // -(E|boundary| - 1) ln(1 - mu(g))
  double h_range = 0.0;
  bool ok = false;
};

/// Throws ValidationError unless g is a support point with mu(g) < 1.
BoundaryReport boundary_lower_bound(const StepDistribution& mu, std::size_t n, const GroupElement& g,
                                    const ExactOptions& options = {});

/// E|{x in R_n : xg not in R_n}| for every n <= n_max (outer index) and every
/// direction g (inner index), by one depth-first enumeration of all paths;
/// nothing is stored per outcome. Throws ResourceError beyond path_cap.
std::vector<std::vector<double>> expected_boundary_by_paths(const StepDistribution& mu, std::size_t n_max,
                                                            std::span<const GroupElement> directions,
                                                            const ExactOptions& options = {});

/// The same report from a known E|boundary| and H(R_n).
BoundaryReport boundary_report(const StepDistribution& mu, std::size_t n, const GroupElement& g,
                               double expected_boundary, double h_range);

struct AepSummary {
  std::vector<double> values;
  double mean = 0.0;
  double variance = 0.0;
};

/// -ln q_n(R_n, S_n) / n per trajectory, from a law keyed by
/// RangeState::key(true) at the same n. Zero when n = 0.
AepSummary aep_samples(const Group& group, const Law& law, std::size_t n, std::span<const Trajectory> trajectories);
AepSummary aep_samples(const Group& group, const ExactLaw& law, std::size_t n,
                       std::span<const Trajectory> trajectories);

/// TV distance between the law of S_n^-1 R_n and the law of the reversed
/// walk's range.
double reversal_law_check(const StepDistribution& mu, std::size_t n, const ExactOptions& options = {});

/// CSV with header "key_hex,probability".
void write_law_csv(std::ostream& out, const Law& law);
/// CSV with header "n,H_R,H_RS,H_G,H_GS"; trace columns blank when absent.
void write_entropy_csv(std::ostream& out, const EntropySequence& seq);

}  // namespace rangewalk
