#include "rangewalk/ladder.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rangewalk/classify.hpp"
#include "rangewalk/detail/multinomial.hpp"
#include "rangewalk/detail/neumaier.hpp"
#include "rangewalk/error.hpp"
#include "rangewalk/rng.hpp"

namespace rangewalk {

using detail::NeumaierSum;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Terms summed explicitly before an integral remainder takes over.
constexpr std::int64_t kExplicitTerms = 1'000'000;

// sum_{k=from}^{to-1} g(k), added from the small end.
template <class G>
double sum_range(std::int64_t from, std::int64_t to, G&& g) {
  NeumaierSum s;
  for (std::int64_t k = to - 1; k >= from; --k) s.add(g(k));
  return s.value();
}

// sum_{k>=a} g(k) for decreasing g lies in [int_a^inf g, g(a) + int_a^inf g].
Certified remainder(double g_a, double int_lower, double int_upper) {
  const double lo = int_lower;
  const double hi = g_a + int_upper;
  return {(lo + hi) / 2, (hi - lo) / 2};
}

Certified plus(Certified a, double b) { return {a.value + b, a.radius + kEps * std::abs(a.value + b)}; }

Certified ratio(Certified a, Certified b) {
  const double v = a.value / b.value;
  return {v, (a.radius + std::abs(v) * b.radius) / b.lower() + 4 * kEps * std::abs(v)};
}

double log_pow(double x, double b) { return std::pow(std::log(x), b); }

}  // namespace

double SkipFreeMeasure::tail_weight(std::int64_t k) const {
  const double x = static_cast<double>(k);
  if (tail_->shape == TailShape::Power) return std::pow(x, -tail_->exponent);
  return 1.0 / (x * x * log_pow(x, tail_->exponent));
}

SkipFreeMeasure::SkipFreeMeasure(double q, std::vector<double> head, std::optional<TailRule> tail)
    : q_(q), head_(std::move(head)), tail_(tail) {
  if (!(q_ > 0.0 && q_ < 1.0)) throw ValidationError("ladder: q must lie in (0, 1)");
  NeumaierSum total;
  total.add(q_);
  for (double p : head_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("ladder: probabilities must be finite and >= 0");
    total.add(p);
  }
  while (!head_.empty() && head_.back() == 0.0) head_.pop_back();

  NeumaierSum mean;
  mean.add(-q_);
  for (std::size_t k = 1; k < head_.size(); ++k) mean.add(static_cast<double>(k) * head_[k]);
  drift_ = {mean.value(), 4 * kEps * (1 + static_cast<double>(head_.size()))};

  if (tail_) {
    const auto& t = *tail_;
    const double s = t.exponent;
    if (!(t.mass > 0.0)) throw ValidationError("ladder: tail mass must be positive");
    if (t.start < static_cast<std::int64_t>(head_.size()) || t.start < 1)
      throw ValidationError("ladder: tail must start beyond the explicit head");
    if (t.shape == TailShape::Power && !(s > 2.0)) throw ValidationError("ladder: power tail needs exponent > 2");
    if (t.shape == TailShape::PowerLog && !(s > 1.0)) throw ValidationError("ladder: power-log tail needs exponent > 1");
    if (t.shape == TailShape::PowerLog && t.start < 2) throw ValidationError("ladder: power-log tail starts at k >= 2");
    total.add(t.mass);

    const std::int64_t a = t.start + kExplicitTerms;
    const double ad = static_cast<double>(a);
    const double w_a = tail_weight(a);
    Certified z0, z1;
    if (t.shape == TailShape::Power) {
      z0 = remainder(w_a, std::pow(ad, 1 - s) / (s - 1), std::pow(ad, 1 - s) / (s - 1));
      z1 = remainder(ad * w_a, std::pow(ad, 2 - s) / (s - 2), std::pow(ad, 2 - s) / (s - 2));
    } else {
      const double j = 1.0 / (ad * log_pow(ad, s));
      z0 = remainder(w_a, j / (1 + s / std::log(ad)), j);
      const double i1 = log_pow(ad, 1 - s) / (s - 1);
      z1 = remainder(ad * w_a, i1, i1);
    }
    z_ = plus(z0, sum_range(t.start, a, [&](std::int64_t k) { return tail_weight(k); }));
    const Certified m1 =
        plus(z1, sum_range(t.start, a, [&](std::int64_t k) { return static_cast<double>(k) * tail_weight(k); }));
    const Certified tail_mean = ratio(m1, z_);
    drift_.value += t.mass * tail_mean.value;
    drift_.radius += t.mass * tail_mean.radius + 4 * kEps * std::abs(drift_.value);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) throw ValidationError("ladder: probabilities must sum to 1");
  if (!(drift_.upper() < 0.0)) throw NotEscapingError("ladder: drift is not certified negative");
  if (!(drift_.lower() > -1.0)) throw ValidationError("ladder: drift must exceed -1 (some upward or lazy mass)");
}

SkipFreeMeasure SkipFreeMeasure::from_distribution(const StepDistribution& mu) {
  const auto a = detect_no_left_jump(mu);
  if (!a) throw NotEscapingError("ladder: measure is not skip-free with negative drift");
  const std::int64_t w = a->value();
  double q = 0.0;
  std::vector<double> head;
  for (const auto& atom : mu.atoms()) {
    const std::int64_t k = atom.element.value() / w;
    if (k == -1) {
      q = atom.probability;
      continue;
    }
    if (head.size() <= static_cast<std::size_t>(k)) head.resize(static_cast<std::size_t>(k) + 1, 0.0);
    head[static_cast<std::size_t>(k)] = atom.probability;
  }
  SkipFreeMeasure out(q, std::move(head));
  out.witness_ = w;
  return out;
}

std::int64_t SkipFreeMeasure::max_jump() const {
  if (tail_) throw UnsupportedError("ladder: max_jump of an infinite tail");
  return head_.empty() ? 0 : static_cast<std::int64_t>(head_.size()) - 1;
}

double SkipFreeMeasure::p(std::int64_t k) const {
  if (k == -1) return q_;
  if (k < -1) return 0.0;
  if (k < static_cast<std::int64_t>(head_.size())) return head_[static_cast<std::size_t>(k)];
  if (tail_ && k >= tail_->start) return tail_->mass * tail_weight(k) / z_.value;
  return 0.0;
}

std::vector<double> SkipFreeMeasure::tail_sums(std::size_t n) const {
  std::vector<double> out(n + 1, 0.0);
  const auto nn = static_cast<std::int64_t>(n);
  // Head contribution, accumulated from the top.
  double acc = 0.0;
  for (std::int64_t k = static_cast<std::int64_t>(head_.size()) - 1; k >= 0; --k) {
    acc += head_[static_cast<std::size_t>(k)];
    if (k <= nn) out[static_cast<std::size_t>(k)] = acc;
  }
  if (!tail_) return out;

  const auto& t = *tail_;
  const double s = t.exponent;
  const std::int64_t a = std::max(nn, t.start) + kExplicitTerms;
  const double ad = static_cast<double>(a);
  double rem;
  if (t.shape == TailShape::Power) {
    rem = remainder(tail_weight(a), std::pow(ad, 1 - s) / (s - 1), std::pow(ad, 1 - s) / (s - 1)).value;
  } else {
    const double j = 1.0 / (ad * log_pow(ad, s));
    rem = remainder(tail_weight(a), j / (1 + s / std::log(ad)), j).value;
  }
  NeumaierSum w;
  w.add(rem);
  for (std::int64_t k = a - 1; k >= t.start; --k) {
    w.add(tail_weight(k));
    if (k <= nn) out[static_cast<std::size_t>(k)] += t.mass * w.value() / z_.value;
  }
  const double full = t.mass * w.value() / z_.value;
  for (std::int64_t k = 0; k < std::min(t.start, nn + 1); ++k) out[static_cast<std::size_t>(k)] += full;
  return out;
}

std::optional<Certified> SkipFreeMeasure::ladder_mean_numerator() const {
  NeumaierSum head;
  for (std::size_t k = 1; k < head_.size(); ++k) {
    const double kd = static_cast<double>(k);
    head.add(head_[k] * kd * (kd + 1) / 2);
  }
  Certified out{head.value(), 4 * kEps * head.value()};
  if (!tail_) return out;
  const auto& t = *tail_;
  const double s = t.exponent;
  if (t.shape != TailShape::Power || !(s > 3.0)) return std::nullopt;
  const std::int64_t a = t.start + kExplicitTerms;
  const double ad = static_cast<double>(a);
  const double i2 = std::pow(ad, 3 - s) / (s - 3) + std::pow(ad, 2 - s) / (s - 2);
  const Certified rem = remainder(ad * (ad + 1) * tail_weight(a), i2, i2);
  const Certified sum = plus(rem, sum_range(t.start, a, [&](std::int64_t k) {
                               const double kd = static_cast<double>(k);
                               return kd * (kd + 1) * tail_weight(k);
                             }));
  const Certified r = ratio(sum, z_);
  out.value += t.mass * r.value / 2;
  out.radius += t.mass * r.radius / 2;
  return out;
}

std::optional<double> SkipFreeMeasure::log_moment_bound() const {
  // (j + 1) H_j - j, with H_j the harmonic number.
  NeumaierSum head;
  double h = 0.0;
  for (std::size_t j = 1; j < head_.size(); ++j) {
    h += 1.0 / static_cast<double>(j);
    const double jd = static_cast<double>(j);
    head.add(head_[j] * ((jd + 1) * h - jd));
  }
  double out = head.value() * (1 + 8 * kEps);
  if (!tail_) return out;
  const auto& t = *tail_;
  const double s = t.exponent;
  if (t.shape == TailShape::PowerLog && !(s > 2.0)) return std::nullopt;
  const std::int64_t a = t.start + kExplicitTerms;
  const double ad = static_cast<double>(a);
  // For j >= a: (j + 1) H_j - j <= (j + 1) ln j <= (1 + 1/a) j ln j.
  double integral;
  if (t.shape == TailShape::Power) {
    integral = std::pow(ad, 2 - s) * (std::log(ad) / (s - 2) + 1 / ((s - 2) * (s - 2)));
  } else {
    integral = log_pow(ad, 2 - s) / (s - 2);
  }
  const double rem = (1 + 1 / ad) * (ad * std::log(ad) * tail_weight(a) + integral);
  NeumaierSum body;
  double hk = 0.0;
  for (std::int64_t k = 1; k < a; ++k) {
    hk += 1.0 / static_cast<double>(k);
    if (k >= t.start) {
      const double kd = static_cast<double>(k);
      body.add(tail_weight(k) * ((kd + 1) * hk - kd));
    }
  }
  const double tail_sum = (body.value() + rem) * (1 + 1e-12);
  out += t.mass * tail_sum / z_.lower();
  return out;
}

double f0(const SkipFreeMeasure& mu) { return -mu.drift().value / mu.q(); }

SupremumLaw supremum_law(const SkipFreeMeasure& mu, std::size_t n, const LawOptions& options) {
  const std::size_t reach = mu.finite_support() ? static_cast<std::size_t>(mu.max_jump()) : n;
  double work = 0.0;
  for (std::size_t k = 1; k <= std::min(n, reach); ++k) work += static_cast<double>(k);
  if (n > reach) work += static_cast<double>(n - reach) * static_cast<double>(reach);
  if (work > options.max_work) throw ResourceError("ladder: recursion work exceeds max_work");

  const std::vector<double> pp = mu.tail_sums(n);
  SupremumLaw law;
  law.f.assign(n + 1, 0.0);
  law.f[0] = f0(mu);
  const double q = mu.q();
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t top = std::min(i, reach);
    double acc = 0.0;
    for (std::size_t k = 1; k <= top; ++k) acc += pp[k] * law.f[i - k];
    law.f[i] = acc / q;
  }
  NeumaierSum mass;
  for (double x : law.f) mass.add(x);
  law.tail_mass = std::max(0.0, 1.0 - mass.value());
  // Relative error of f_i grows at most by (reach + 2) eps per step, plus the
  // uncertainty of f_0 and of the tail normalizer.
  const double nd = static_cast<double>(n);
  const double rel = nd * (static_cast<double>(std::min(n, reach)) + 2) * kEps +
                     mu.drift().radius / std::abs(mu.drift().value) + 2 * (nd + 1) * kEps;
  law.tail_bound = std::min(1.0, law.tail_mass + rel + kEps);
  if (reach == 0) law.tail_bound = law.tail_mass = 0.0;  // eta = 0 surely
  return law;
}

double lower_bound_violation(const SkipFreeMeasure& mu, const SupremumLaw& law) {
  const std::vector<double> pp = mu.tail_sums(law.n());
  const double f_0 = law.f[0];
  double worst = 0.0;
  for (std::size_t i = 1; i <= law.n(); ++i) {
    const double bound = pp[i] * f_0 / mu.q();
    if (bound > 0.0) worst = std::max(worst, (bound - law.f[i]) / bound);
  }
  return std::max(worst, 0.0);
}

GeneratingReport check_generating_function(const SkipFreeMeasure& mu, const SupremumLaw& law,
                                           std::span<const double> t_grid) {
  std::size_t k_max = 1;
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 1.0)) throw ValidationError("ladder: generating-function grid must lie in (0, 1)");
    if (law.tail_bound * std::pow(t, static_cast<double>(law.n() + 1)) > 1e-10)
      throw PrecisionError("ladder: law too short for the requested t grid");
    // Series for P and Pbar are cut where t^(K+1) / (1 - t) < 1e-18.
    const auto k = static_cast<std::size_t>(std::ceil(std::log(1e-18 * (1 - t)) / std::log(t)));
    k_max = std::max(k_max, k);
  }
  if (mu.finite_support()) k_max = std::min(k_max, static_cast<std::size_t>(mu.max_jump()) + 1);
  const std::vector<double> pp = mu.tail_sums(k_max);

  GeneratingReport report;
  const double q = mu.q();
  const double qf0 = q * law.f[0];
  for (double t : t_grid) {
    GeneratingRow row{t};
    for (std::size_t i = law.f.size(); i-- > 0;) row.partial = row.partial * t + law.f[i];
    double p_t = 0.0, pbar_t = 0.0;
    for (std::size_t i = k_max + 1; i-- > 0;) {
      p_t = p_t * t + mu.p(static_cast<std::int64_t>(i));
      pbar_t = pbar_t * t + (i >= 1 ? pp[i] : 0.0);
    }
    row.rational_form = qf0 * (1 - t) / (q + t * p_t - t);
    row.ladder_form = qf0 / (q - pbar_t);
    report.max_residual = std::max(
        {report.max_residual, std::abs(row.partial - row.rational_form), std::abs(row.partial - row.ladder_form)});
    report.max_form_gap = std::max(report.max_form_gap, std::abs(row.rational_form - row.ladder_form));
    report.rows.push_back(row);
  }
  return report;
}

std::string_view to_string(TailCriterion c) { return c == TailCriterion::Finite ? "finite" : "infinite"; }

TailVerdict tail_criterion(const SkipFreeMeasure& mu) {
  TailVerdict v;
  const auto& t = mu.tail();
  if (t && t->shape == TailShape::PowerLog && t->exponent <= 2.0) v.criterion = TailCriterion::Infinite;
  v.entropy_finite = v.criterion == TailCriterion::Finite;
  return v;
}

std::optional<double> EtaEntropy::upper() const {
  if (!tail_bound) return std::nullopt;
  return partial + *tail_bound;
}

EtaEntropy entropy_eta(const SkipFreeMeasure& mu, const SupremumLaw& law) {
  EtaEntropy out;
  NeumaierSum h, mean, log_mean;
  for (std::size_t i = 0; i < law.f.size(); ++i) {
    const double f = law.f[i];
    if (f > 0.0) h.add(-f * std::log(f));
    mean.add(static_cast<double>(i) * f);
    log_mean.add(std::log(static_cast<double>(i) + 1) * f);
  }
  out.partial = h.value();
  if (tail_criterion(mu).criterion == TailCriterion::Infinite) {
    out.unbounded = true;
    return out;
  }
  const double t_hat = law.tail_bound;
  if (t_hat == 0.0) {
    out.tail_bound = 0.0;
    return out;
  }
  // T (C + 2 ln E) - 3 T ln T is increasing in T only below e^(C-3).
  const double c = lemma61_constant().upper();
  if (t_hat >= std::exp(c - 3)) return out;
  const double nd = static_cast<double>(law.n());
  const double err = law.tail_bound - law.tail_mass;
  const double qf0 = -mu.drift().upper();

  std::optional<double> best;
  if (const auto num = mu.ladder_mean_numerator()) {
    const double e_eta = num->upper() / qf0;
    const double slack = nd * err + e_eta * 4 * kEps * (nd + 1);
    const double e_plus = std::max(e_eta - mean.value() + slack, t_hat);
    best = t_hat * (c + 2 * std::log(e_plus / t_hat)) - t_hat * std::log(t_hat);
  }
  if (const auto b = mu.log_moment_bound()) {
    const double slack = std::log(nd + 1) * err;
    const double e_log = std::max(*b / qf0 - log_mean.value() + slack, 0.0);
    const double bound = t_hat * c + 2 * e_log - t_hat * std::log(t_hat);
    best = best ? std::min(*best, bound) : bound;
  }
  out.tail_bound = best;
  return out;
}

GrowthDiagnostic entropy_growth(const SkipFreeMeasure& mu, std::size_t n) {
  GrowthDiagnostic g;
  g.n = n;
  const double f_0 = f0(mu);
  const double inv_e = std::exp(-1.0);
  double ceiling = 1 - f_0;
  if (ceiling > inv_e) {
    const SupremumLaw head = supremum_law(mu, std::min<std::size_t>(n / 2, 2048));
    ceiling = head.tail_bound;
  }
  g.certified = ceiling <= inv_e;
  const std::vector<double> pp = mu.tail_sums(n);
  NeumaierSum s;
  for (std::size_t i = n / 2 + 1; i <= n; ++i) {
    const double l = pp[i] * f_0 / mu.q();
    if (l > 0.0) s.add(-l * std::log(l));
  }
  g.lower_bound = s.value();
  return g;
}

Certified lemma61_constant() {
  static const Certified c = [] {
    constexpr std::int64_t k = 1'000'000;
    const double sum = sum_range(2, k + 1, [](std::int64_t n) {
      const double x = static_cast<double>(n);
      return std::log(x) / (x * x);
    });
    // int_a^inf ln x / x^2 dx = (ln a + 1) / a; ln x / x^2 decreases for x > sqrt(e).
    const double kd = static_cast<double>(k);
    const double lo = (std::log(kd + 1) + 1) / (kd + 1);
    const double hi = (std::log(kd) + 1) / kd;
    const double base = std::exp(-1.0) + 2 * sum;
    return Certified{base + lo + hi, (hi - lo) + 1e-14};
  }();
  return c;
}

IntegralBounds entropy_integral_bounds(std::span<const double> p) {
  NeumaierSum total, h, e_log;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) throw ValidationError("ladder: probabilities must be finite and >= 0");
    total.add(p[i]);
    if (p[i] > 0.0) {
      h.add(-p[i] * std::log(p[i]));
      e_log.add(p[i] * std::log(static_cast<double>(i) + 1));
    }
  }
  if (std::abs(total.value() - 1.0) > 1e-9) throw ValidationError("ladder: probabilities must sum to 1");
  IntegralBounds r;
  r.entropy = h.value();
  r.mean_log = e_log.value();
  r.c = lemma61_constant();
  r.upper = r.c.upper() + 2 * r.mean_log;
  r.upper_holds = r.entropy <= r.upper + 1e-12;
  r.decreasing = std::adjacent_find(p.begin(), p.end(), std::less<>()) == p.end();
  r.lower_holds = r.mean_log <= r.entropy + 1e-12;
  return r;
}

namespace {

struct SupremumSampler {
  std::vector<std::int64_t> values;
  std::vector<double> probs;
  AliasTable alias;
  std::uint64_t up = 0;
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> counts;

  // Returns (max_{k<=horizon} S_k, M - S at the stop time). The walk stops
  // early once it cannot climb back to M before the horizon, and jumps m
  // steps at once while m * up <= M - S.
  std::pair<std::uint64_t, std::uint64_t> run(CounterRng& rng) {
    std::int64_t s = 0, m = 0;
    std::uint64_t t = 0;
    while (t < horizon) {
      const auto d = static_cast<std::uint64_t>(m - s);
      const std::uint64_t rest = horizon - t;
      if (static_cast<unsigned __int128>(up) * rest <= d) break;
      const std::uint64_t safe = d / up;
      if (safe >= 32) {
        const std::uint64_t len = std::min(safe, rest);
        detail::multinomial(probs, len, rng, counts);
        for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * static_cast<std::int64_t>(counts[i]);
        t += len;
      } else {
        s += values[alias.sample(rng)];
        ++t;
        m = std::max(m, s);
      }
    }
    return {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(m - s)};
  }
};

double total_variation(std::span<const std::uint64_t> hist, std::uint64_t samples, const SupremumLaw& law,
                       std::vector<double>* empirical) {
  const double inv = 1.0 / static_cast<double>(samples);
  NeumaierSum tv;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double e = static_cast<double>(hist[i]) * inv;
    const double f = i < law.f.size() ? law.f[i] : law.tail_mass;
    tv.add(std::abs(e - f));
    if (empirical) empirical->push_back(e);
  }
  return tv.value() / 2;
}

}  // namespace

SupremumMcReport mc_supremum_check(const SkipFreeMeasure& mu, const SupremumLaw& law, std::uint64_t horizon,
                                   std::uint64_t samples, const McOptions& options) {
  if (!mu.finite_support()) throw UnsupportedError("ladder: Monte Carlo needs a finitely supported measure");
  if (samples == 0) throw ValidationError("ladder: samples must be positive");
  if (options.streams == 0) throw ValidationError("ladder: streams must be positive");

  SupremumSampler base;
  for (std::int64_t k = -1; k <= mu.max_jump(); ++k) {
    if (mu.p(k) > 0.0) {
      base.values.push_back(k);
      base.probs.push_back(mu.p(k));
    }
  }
  base.alias = AliasTable(base.probs);
  base.up = static_cast<std::uint64_t>(mu.max_jump());
  base.horizon = horizon;

  // P(eta >= j) for j = 0 .. N + 1, summed from the top.
  const std::size_t n = law.n();
  std::vector<double> at_least(n + 2, 0.0);
  at_least[n + 1] = law.tail_bound;
  for (std::size_t j = n + 1; j-- > 0;) at_least[j] = at_least[j + 1] + law.f[j];

  struct Block {
    std::vector<std::uint64_t> direct, recursion;
    NeumaierSum bias;
  };
  std::vector<Block> blocks(options.streams);
  parallel_for(options.streams, resolve_workers(options.workers), [&](std::size_t j) {
    SupremumSampler sampler = base;
    CounterRng rng({options.seed, j});
    Block& b = blocks[j];
    b.direct.assign(n + 2, 0);
    b.recursion.assign(n + 2, 0);
    const std::uint64_t count = block_size(samples, options.streams, j);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto [m, d] = sampler.run(rng);
      ++b.direct[std::min<std::uint64_t>(m, n + 1)];
      b.bias.add(at_least[std::min<std::uint64_t>(d + 1, n + 1)]);
      const auto [m2, d2] = sampler.run(rng);
      (void)d2;
      const std::int64_t x = sampler.values[sampler.alias.sample(rng)];
      const auto v = static_cast<std::uint64_t>(std::max<std::int64_t>(0, x + static_cast<std::int64_t>(m2)));
      ++b.recursion[std::min<std::uint64_t>(v, n + 1)];
    }
  });

  std::vector<std::uint64_t> direct(n + 2, 0), recursion(n + 2, 0);
  NeumaierSum bias;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < n + 2; ++i) {
      direct[i] += b.direct[i];
      recursion[i] += b.recursion[i];
    }
    bias.add(b.bias.value());
  }
  SupremumMcReport r;
  r.samples = samples;
  r.horizon = horizon;
  r.tv = total_variation(direct, samples, law, &r.empirical);
  r.recursion_tv = total_variation(recursion, samples, law, nullptr);
  r.bias_bound = bias.value() / static_cast<double>(samples);
  return r;
}

void write_ladder_csv(std::ostream& out, const SupremumLaw& law) {
  out << "n,f_n,cum,partial_H\n";
  NeumaierSum cum, h;
  char buf[128];
  for (std::size_t i = 0; i < law.f.size(); ++i) {
    const double f = law.f[i];
    cum.add(f);
    if (f > 0.0) h.add(-f * std::log(f));
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, f, cum.value(), h.value());
    out << buf;
  }
}

}  // namespace rangewalk
