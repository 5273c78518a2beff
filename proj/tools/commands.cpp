#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "rangewalk/classify.hpp"
#include "rangewalk/dist_exact.hpp"
#include "rangewalk/error.hpp"
#include "rangewalk/estimate_mc.hpp"
#include "rangewalk/ladder.hpp"
#include "rangewalk/rng.hpp"
#include "suites.hpp"

namespace rangewalk::cli {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

struct Common {
  std::string config_path;
  std::string measure_name;
  std::string out = ".";
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  bool assert_checks = false;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  std::vector<std::string> argv;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "JSON run configuration");
  sub->add_option("--measure", c.measure_name, "built-in measure instead of --config");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  c.workers_opt = sub->add_option("--workers", c.workers, "worker threads (default RANGEWALK_WORKERS, then all cores)");
  c.seed_opt = sub->add_option("--seed", c.seed, "master seed (overrides the config)");
  sub->add_flag("--assert", c.assert_checks, "exit 4 when a check fails");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> split_all(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& i : items) {
    for (auto& s : split(i, ',')) out.push_back(std::move(s));
  }
  return out;
}

std::optional<NamedMeasure> builtin(const std::string& name) {
  for (auto& m : codec_measures()) {
    if (m.name == name) return m;
  }
  return std::nullopt;
}

std::string builtin_names() {
  std::string s;
  for (const auto& m : codec_measures()) s += (s.empty() ? "" : ", ") + m.name;
  return s;
}

std::optional<RunConfig> load(const Common& c, bool required) {
  if (!c.config_path.empty() && !c.measure_name.empty())
    throw ConfigError("--measure", "give either --config or --measure, not both");
  if (!c.config_path.empty()) return parse_config(c.config_path);
  if (!c.measure_name.empty()) {
    auto m = builtin(c.measure_name);
    if (!m) throw ConfigError("--measure", "unknown measure; expected one of " + builtin_names());
    RunConfig r;
    r.group = m->mu.group().descriptor();
    r.mu = m->mu;
    r.source = {{"measure", m->name}};
    return r;
  }
  if (required) throw ConfigError("--config", "a configuration file or --measure is required");
  return std::nullopt;
}

std::string config_name(const RunConfig& cfg) {
  return cfg.source.contains("measure") ? cfg.source["measure"].get<std::string>() : "config";
}

struct Resolved {
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

Resolved resolve(const Common& c, const std::optional<RunConfig>& cfg) {
  Resolved r;
  r.seed = c.seed_opt->count() > 0 ? c.seed : (cfg ? cfg->seed : 0);
  std::size_t requested = 0;
  if (c.workers_opt->count() > 0) {
    requested = c.workers;
  } else if (cfg && cfg->workers) {
    requested = *cfg->workers;
  }
  r.workers = resolve_workers(requested);
  return r;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Output directory of one run. Files are listed in the manifest.
class Bundle {
 public:
  Bundle(const std::string& dir, std::string command) : dir_(dir), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  void csv(const std::string& name, const std::function<void(std::ostream&)>& write) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    write(out);
    files_.push_back(name);
  }

  void json(const std::string& name, const ordered_json& doc) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    out << doc.dump(2) << '\n';
    files_.push_back(name);
  }

  void manifest(const Common& c, const std::optional<RunConfig>& cfg, const Resolved& r, ordered_json params) {
    ordered_json m;
    m["tool"] = "rangewalk";
    m["version"] = kVersion;
    m["command"] = command_;
    m["arguments"] = c.argv;
    m["config"] = cfg ? config_json(*cfg) : ordered_json(nullptr);
    m["seed"] = r.seed;
    m["workers"] = r.workers;
    m["parameters"] = std::move(params);
    m["outputs"] = files_;
    m["timestamp"] = utc_now();
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot write manifest.json");
    out << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::string command_;
  std::vector<std::string> files_;
};

ordered_json certified_json(const Certified& c) {
  return {{"value", c.value}, {"lower", c.lower()}, {"upper", c.upper()}};
}

ordered_json suite_json(const SuiteResult& s, const std::string& measure) {
  ordered_json j{{"suite", s.name}};
  j["measure"] = measure.empty() ? ordered_json(nullptr) : ordered_json(measure);
  j["passed"] = s.passed;
  j["detail"] = s.detail;
  return j;
}

// Entropy targets of the exact and mc commands.
const std::map<std::string, Outcome>& entropy_targets() {
  static const std::map<std::string, Outcome> t{{"range", Outcome::Range},
                                                {"range+endpoint", Outcome::RangeEndpoint},
                                                {"trace", Outcome::Trace},
                                                {"trace+endpoint", Outcome::TraceEndpoint}};
  return t;
}

bool is_trace(const std::string& target) { return target.rfind("trace", 0) == 0; }

double sequence_value(const EntropySequence& seq, const std::string& target, std::size_t n) {
  if (target == "range") return seq.h_r[n];
  if (target == "range+endpoint") return seq.h_rs[n];
  if (target == "trace") return seq.h_g[n];
  return seq.h_gs[n];
}

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("--t-grid", "expected a:b:k");
  double a = 0, b = 0;
  long long k = 0;
  try {
    a = std::stod(parts[0]);
    b = std::stod(parts[1]);
    k = std::stoll(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("--t-grid", "expected a:b:k with numbers a, b and a count k");
  }
  if (k < 1) throw ConfigError("--t-grid", "k must be positive");
  std::vector<double> grid;
  for (long long i = 0; i < k; ++i) grid.push_back(k == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1));
  return grid;
}

// ---------------------------------------------------------------- exact

struct ExactArgs {
  std::size_t n_max = 12;
  CLI::Option* n_max_opt = nullptr;
  std::vector<std::string> targets;
  bool rational = false;
  std::size_t state_cap = 0;
  CLI::Option* state_cap_opt = nullptr;
  std::size_t trace_n_max = 0;
  CLI::Option* trace_n_max_opt = nullptr;
};

int run_exact(const Common& c, const ExactArgs& a) {
  const auto cfg = load(c, true);
  const Resolved r = resolve(c, cfg);
  const StepDistribution& mu = cfg->measure();
  const std::size_t n_max = a.n_max_opt->count() > 0 ? a.n_max : cfg->n_max.value_or(12);

  auto targets = split_all(a.targets);
  if (targets.empty()) targets = cfg->targets;
  if (targets.empty()) targets = {"range", "range+endpoint", "trace", "trace+endpoint"};
  bool trace = false;
  for (const auto& t : targets) {
    if (!entropy_targets().contains(t)) throw ConfigError("--targets", "unknown target \"" + t + "\"");
    trace = trace || is_trace(t);
  }

  SequenceOptions so;
  so.exact.workers = r.workers;
  if (a.state_cap_opt->count() > 0) {
    so.exact.state_cap = a.state_cap;
  } else if (cfg->state_cap) {
    so.exact.state_cap = *cfg->state_cap;
  }
  so.trace = trace;
  so.rational = a.rational || cfg->arithmetic == Arithmetic::Rational;
  if (so.rational && !mu.has_exact())
    throw ConfigError("arithmetic", "rational mode needs exact probabilities (give a config with rational probs)");
  if (a.trace_n_max_opt->count() > 0) so.trace_n_max = a.trace_n_max;

  const auto seq = entropy_sequence(mu, n_max, so);
  const auto sub = subadditivity_suite(seq);
  const auto sand = sandwich_suite(mu, seq);

  Bundle bundle(c.out, "exact");
  bundle.csv("entropy.csv", [&](std::ostream& o) { write_entropy_csv(o, seq); });
  ordered_json summary;
  summary["n_max"] = n_max;
  summary["rational"] = seq.rational;
  summary["step_entropy"] = mu.entropy();
  summary["h_proxy"] = seq.h_proxy();
  summary["checks"] = {suite_json(sub, ""), suite_json(sand, "")};
  bundle.json("summary.json", summary);
  bundle.manifest(c, cfg, r,
                  {{"n_max", n_max}, {"targets", targets}, {"rational", so.rational}, {"state_cap", so.exact.state_cap},
                   {"trace_n_max", trace ? ordered_json(std::min(n_max, so.trace_n_max)) : ordered_json(nullptr)}});

  const bool ok = sub.passed && sand.passed;
  if (!ok) std::cerr << "exact: a subadditivity or sandwich check failed (see summary.json)\n";
  return c.assert_checks && !ok ? kAssertion : kOk;
}

// ---------------------------------------------------------------- mc

struct McArgs {
  std::size_t n = 8;
  CLI::Option* n_opt = nullptr;
  std::uint64_t samples = 100'000;
  CLI::Option* samples_opt = nullptr;
  std::vector<std::string> targets;
  std::string method = "plug-in";
  std::size_t streams = 64;
  CLI::Option* streams_opt = nullptr;
  std::uint64_t horizon = 10'000;
  CLI::Option* horizon_opt = nullptr;
};

int run_mc(const Common& c, const McArgs& a) {
  const auto cfg = load(c, true);
  const Resolved r = resolve(c, cfg);
  const StepDistribution& mu = cfg->measure();
  const std::size_t n = a.n_opt->count() > 0 ? a.n : cfg->n.value_or(8);
  const std::uint64_t samples = a.samples_opt->count() > 0 ? a.samples : cfg->samples.value_or(100'000);
  const std::uint64_t horizon = a.horizon_opt->count() > 0 ? a.horizon : cfg->horizon.value_or(10'000);
  McOptions mo;
  mo.seed = r.seed;
  mo.workers = r.workers;
  mo.streams = a.streams_opt->count() > 0 ? a.streams : cfg->streams.value_or(64);

  EntropyMethod method;
  if (a.method == "plug-in") {
    method = EntropyMethod::PlugIn;
  } else if (a.method == "miller-madow") {
    method = EntropyMethod::MillerMadow;
  } else {
    throw ConfigError("--method", "expected plug-in or miller-madow");
  }

  auto targets = split_all(a.targets);
  if (targets.empty()) targets = cfg->targets;
  if (targets.empty()) targets = {"range+endpoint"};

  std::vector<McRow> rows;
  ordered_json details = ordered_json::array();
  bool ok = true;
  std::optional<EntropySequence> exact;
  for (const auto& t : targets) {
    if (auto it = entropy_targets().find(t); it != entropy_targets().end()) {
      const auto e = mc_entropy(mu, n, samples, it->second, mo, method);
      rows.push_back({t, n, samples, e.value, e.stderr_, std::string(to_string(method)), r.seed});
      ordered_json d{{"target", t}, {"estimate", e.value}, {"plug_in", e.plug_in}, {"miller_madow", e.miller_madow},
                     {"stderr", e.stderr_}, {"distinct", e.distinct}};
      if (c.assert_checks) {
        if (!exact || (is_trace(t) && !exact->has_trace())) {
          SequenceOptions so;
          so.exact.workers = r.workers;
          exact = entropy_sequence(mu, n, so);
        }
        const double truth = sequence_value(*exact, t, n);
        const double bias = (static_cast<double>(e.distinct) - 1) / (2.0 * static_cast<double>(samples));
        const double tol = 3 * (e.stderr_ + bias);
        const bool pass = std::abs(e.value - truth) <= tol;
        d["exact"] = truth;
        d["tolerance"] = tol;
        d["passed"] = pass;
        ok = ok && pass;
      }
      details.push_back(d);
    } else if (t == "escape") {
      const auto h = escape_rate(mu, horizon, samples, mo);
      rows.push_back({t, static_cast<std::size_t>(horizon), samples, h.estimate, h.ci_half_width / 1.96, "truncated",
                      r.seed});
      details.push_back({{"target", t}, {"estimate", h.estimate}, {"horizon", horizon},
                         {"ci_half_width", h.ci_half_width}});
    } else if (t == "mean-range") {
      const auto m = mean_range_rate(mu, n, samples, mo);
      rows.push_back({t, n, samples, m.mean, m.stderr_, "mean", r.seed});
      details.push_back({{"target", t}, {"estimate", m.mean}, {"stderr", m.stderr_}});
    } else {
      throw ConfigError("--targets", "unknown target \"" + t + "\"");
    }
  }

  Bundle bundle(c.out, "mc");
  bundle.csv("mc.csv", [&](std::ostream& o) { write_mc_csv(o, rows); });
  bundle.json("summary.json", {{"targets", details}});
  bundle.manifest(c, cfg, r,
                  {{"n", n}, {"samples", samples}, {"targets", targets}, {"method", to_string(method)},
                   {"streams", mo.streams}, {"horizon", horizon}});
  if (!ok) std::cerr << "mc: an estimate is outside 3(stderr + (K-1)/2N) of the exact value\n";
  return c.assert_checks && !ok ? kAssertion : kOk;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  bool mc_evidence = false;
  std::uint64_t horizon = 10'000;
  std::uint64_t samples = 100'000;
  std::size_t n_max = 0;
  CLI::Option* n_max_opt = nullptr;
  double trace_lower_bound = 0.0;
  CLI::Option* trace_lower_bound_opt = nullptr;
};

int run_classify(const Common& c, const ClassifyArgs& a) {
  const auto cfg = load(c, true);
  const Resolved r = resolve(c, cfg);
  const StepDistribution& mu = cfg->measure();
  const Group& group = mu.group();

  ClassifyOptions co;
  co.mc_evidence = a.mc_evidence;
  co.horizon = a.horizon;
  co.samples = a.samples;
  co.mc.seed = r.seed;
  co.mc.workers = r.workers;
  const WalkClass cls = classify(mu, co);

  ordered_json out;
  out["class"] = to_string(cls.kind);
  out["witness"] = cls.witness ? element_json(group, *cls.witness) : ordered_json(nullptr);
  out["evidence"] = cls.evidence;
  if (cls.escape) {
    out["escape"] = {{"estimate", cls.escape->estimate}, {"horizon", cls.escape->horizon},
                     {"samples", cls.escape->samples}, {"ci_half_width", cls.escape->ci_half_width}};
  }
  if (cls.kind != WalkClassKind::Unknown) {
    const auto p = predict_vanishing(cls);
    out["prediction"] = {{"h_R_zero", p.h_r_zero}, {"h_Gamma_zero", p.h_gamma_zero}};
  } else {
    out["prediction"] = nullptr;
  }

  bool ok = true;
  ordered_json params{{"mc_evidence", a.mc_evidence}, {"horizon", a.horizon}, {"samples", a.samples}};
  const bool trend = a.n_max_opt->count() > 0 || cfg->n_max.has_value();
  if (trend) {
    const std::size_t n_max = a.n_max_opt->count() > 0 ? a.n_max : *cfg->n_max;
    SequenceOptions so;
    so.exact.workers = r.workers;
    const auto seq = entropy_sequence(mu, n_max, so);
    std::optional<double> lb;
    if (a.trace_lower_bound_opt->count() > 0) lb = a.trace_lower_bound;
    const auto rep = trend_report(mu, seq, cls, lb);
    ordered_json checks = ordered_json::array();
    for (const auto& ch : rep.checks) checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    out["trend"] = {{"n_max", n_max}, {"ok", rep.ok()}, {"h_R_equals_step_entropy", rep.h_r_equals_step_entropy},
                    {"rs_rate", rep.rs_rate}, {"gs_rate", rep.gs_rate}, {"checks", checks}};
    ok = rep.ok();
    params["n_max"] = n_max;
    params["trace_lower_bound"] = lb ? ordered_json(*lb) : ordered_json(nullptr);
  }

  Bundle bundle(c.out, "classify");
  bundle.json("classify.json", out);
  bundle.manifest(c, cfg, r, params);
  if (!ok) std::cerr << "classify: a trend check failed (see classify.json)\n";
  return c.assert_checks && !ok ? kAssertion : kOk;
}

// ---------------------------------------------------------------- ladder

struct LadderArgs {
  std::size_t n = 200;
  CLI::Option* n_opt = nullptr;
  std::string t_grid = "0.1:0.9:9";
  std::uint64_t mc_samples = 0;
  std::uint64_t horizon = 10'000;
  CLI::Option* horizon_opt = nullptr;
};

int run_ladder(const Common& c, const LadderArgs& a) {
  const auto cfg = load(c, true);
  const Resolved r = resolve(c, cfg);
  const auto sm = SkipFreeMeasure::from_distribution(cfg->measure());
  const std::size_t n = a.n_opt->count() > 0 ? a.n : cfg->n.value_or(200);
  const auto grid = parse_grid(a.t_grid);

  const auto law = supremum_law(sm, n);
  const auto gf = check_generating_function(sm, law, grid);
  const auto eta = entropy_eta(sm, law);
  const auto tail = tail_criterion(sm);
  const double violation = lower_bound_violation(sm, law);

  ordered_json out;
  out["witness"] = sm.witness();
  out["q"] = sm.q();
  out["drift"] = certified_json(sm.drift());
  out["f0"] = f0(sm);
  out["n"] = law.n();
  out["tail_mass"] = law.tail_mass;
  out["tail_bound"] = law.tail_bound;
  out["lower_bound_violation"] = violation;
  ordered_json rows = ordered_json::array();
  for (const auto& row : gf.rows)
    rows.push_back({{"t", row.t}, {"partial", row.partial}, {"rational_form", row.rational_form},
                    {"ladder_form", row.ladder_form}});
  out["generating_function"] = {{"max_residual", gf.max_residual}, {"max_form_gap", gf.max_form_gap}, {"rows", rows}};
  const auto upper = eta.upper();
  out["entropy"] = {{"lower", eta.lower()},
                    {"upper", upper ? ordered_json(*upper) : ordered_json(nullptr)},
                    {"tail_bound", eta.tail_bound ? ordered_json(*eta.tail_bound) : ordered_json(nullptr)},
                    {"unbounded", eta.unbounded}};
  out["tail_criterion"] = {{"x_log_x", to_string(tail.criterion)}, {"entropy_finite", tail.entropy_finite}};

  bool ok = gf.max_residual <= 1e-8 && violation == 0.0;
  const std::uint64_t horizon = a.horizon_opt->count() > 0 ? a.horizon : cfg->horizon.value_or(10'000);
  if (a.mc_samples > 0) {
    McOptions mo;
    mo.seed = r.seed;
    mo.workers = r.workers;
    if (cfg->streams) mo.streams = *cfg->streams;
    const auto mc = mc_supremum_check(sm, law, horizon, a.mc_samples, mo);
    out["mc"] = {{"samples", mc.samples}, {"horizon", mc.horizon}, {"tv", mc.tv}, {"recursion_tv", mc.recursion_tv},
                 {"bias_bound", mc.bias_bound}};
    ok = ok && mc.tv <= 0.01;
  }

  Bundle bundle(c.out, "ladder");
  bundle.csv("ladder.csv", [&](std::ostream& o) { write_ladder_csv(o, law); });
  bundle.json("ladder.json", out);
  bundle.manifest(c, cfg, r,
                  {{"n", n}, {"t_grid", grid}, {"mc_samples", a.mc_samples}, {"horizon", horizon}});
  if (!ok) std::cerr << "ladder: a check failed (see ladder.json)\n";
  return c.assert_checks && !ok ? kAssertion : kOk;
}

// ---------------------------------------------------------------- codec-fuzz

struct CodecArgs {
  std::size_t trajectories = 2000;
  std::size_t max_n = 300;
  std::size_t entropy_n = 6;
};

int run_codec(const Common& c, const CodecArgs& a) {
  const auto cfg = load(c, false);
  const Resolved r = resolve(c, cfg);
  if (a.max_n == 0) throw ConfigError("--max-n", "must be positive");
  std::vector<NamedMeasure> measures;
  if (cfg) {
    measures.push_back({config_name(*cfg), cfg->measure()});
  } else {
    measures = codec_measures();
  }
  const auto res = codec_suite(measures, a.trajectories, a.max_n, r.seed, a.entropy_n);

  Bundle bundle(c.out, "codec-fuzz");
  bundle.json("codec.json", suite_json(res, ""));
  bundle.manifest(c, cfg, r,
                  {{"trajectories_per_measure", a.trajectories}, {"max_n", a.max_n}, {"entropy_n", a.entropy_n}});
  if (!res.passed) std::cerr << "codec-fuzz: failures recorded in codec.json\n";
  return c.assert_checks && !res.passed ? kAssertion : kOk;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::vector<std::string> suites;
  std::size_t n_max = 12;
  CLI::Option* n_max_opt = nullptr;
  std::size_t cond_n_max = 0;
  CLI::Option* cond_n_max_opt = nullptr;
  std::size_t cases = 10'000;
  std::size_t trajectories = 1000;
};

const std::vector<std::string> kSuites{"subadditivity", "reversal", "lemma31", "lemma61", "boundary", "aep"};

NamedMeasure named(const std::string& name) { return *builtin(name); }

int run_check(const Common& c, const CheckArgs& a) {
  const auto cfg = load(c, false);
  const Resolved r = resolve(c, cfg);

  auto suites = split_all(a.suites);
  if (suites.empty() || (suites.size() == 1 && suites[0] == "all")) suites = kSuites;
  for (const auto& s : suites) {
    if (std::find(kSuites.begin(), kSuites.end(), s) == kSuites.end())
      throw ConfigError("--suite", "unknown suite \"" + s + "\"");
  }
  const bool want_trace = std::find(suites.begin(), suites.end(), "subadditivity") != suites.end();
  ExactOptions eo;
  eo.workers = r.workers;
  if (cfg && cfg->state_cap) eo.state_cap = *cfg->state_cap;

  auto measures_or = [&](std::vector<NamedMeasure> defaults) {
    if (cfg) return std::vector<NamedMeasure>{{config_name(*cfg), cfg->measure()}};
    return defaults;
  };
  const auto n_for = [&](std::size_t fallback) {
    if (a.n_max_opt->count() > 0) return a.n_max;
    if (cfg && cfg->n_max) return *cfg->n_max;
    return fallback;
  };

  std::map<std::string, EntropySequence> sequences;
  auto sequence = [&](const NamedMeasure& m, std::size_t n_max) -> const EntropySequence& {
    auto it = sequences.find(m.name);
    if (it != sequences.end() && it->second.n_max() >= n_max) return it->second;
    SequenceOptions so;
    so.exact = eo;
    so.trace = want_trace;
    return sequences.insert_or_assign(m.name, entropy_sequence(m.mu, n_max, so)).first->second;
  };

  ordered_json results = ordered_json::array();
  bool all = true;
  auto record = [&](const SuiteResult& s, const std::string& measure) {
    results.push_back(suite_json(s, measure));
    all = all && s.passed;
    std::cerr << (s.passed ? "PASS " : "FAIL ") << s.name << (measure.empty() ? "" : " [" + measure + "]") << '\n';
  };

  ordered_json params{{"suites", suites}};
  for (const auto& suite : suites) {
    if (suite == "subadditivity") {
      const std::size_t n_max = n_for(12);
      for (const auto& m : measures_or(test_measures())) {
        const auto& seq = sequence(m, n_max);
        record(subadditivity_suite(seq), m.name);
        record(sandwich_suite(m.mu, seq), m.name);
      }
      params["subadditivity_n_max"] = n_max;
    } else if (suite == "reversal") {
      const std::size_t n_max = n_for(8);
      for (const auto& m : measures_or({named("drifted-Z"), asymmetric_f2()}))
        record(reversal_suite(m.mu, n_max, eo), m.name);
      params["reversal_n_max"] = n_max;
    } else if (suite == "lemma31") {
      record(lemma31_suite(a.cases, r.seed), "");
      params["cases"] = a.cases;
    } else if (suite == "lemma61") {
      record(lemma61_suite(a.cases, r.seed + 1), "");
      params["cases"] = a.cases;
    } else if (suite == "boundary") {
      const std::size_t n_max = n_for(12);
      const std::size_t cond = a.cond_n_max_opt->count() > 0 ? a.cond_n_max : n_max;
      for (const auto& m : measures_or(test_measures()))
        record(boundary_suite(m.mu, sequence(m, n_max), cond, eo), m.name);
      params["boundary_n_max"] = n_max;
      params["conditional_n_max"] = cond;
    } else if (suite == "aep") {
      const std::size_t n = n_for(12);
      for (const auto& m : measures_or({named("directed-Z2")}))
        record(aep_suite(m.mu, n, a.trajectories, r.seed, eo), m.name);
      params["aep_n"] = n;
      params["trajectories"] = a.trajectories;
    }
  }

  Bundle bundle(c.out, "check");
  bundle.json("check.json", {{"passed", all}, {"results", results}});
  bundle.manifest(c, cfg, r, params);
  return c.assert_checks && !all ? kAssertion : kOk;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "error (" << kind << "): " << e.what() << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"rangewalk: entropy of ranges and traces of random walks on groups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  for (int i = 1; i < argc; ++i) common.argv.emplace_back(argv[i]);

  ExactArgs ea;
  auto* exact = app.add_subcommand("exact", "exact entropy sequences H(R_n), H(R_n,S_n), H(Gamma_n), H(Gamma_n,S_n)");
  add_common(exact, common);
  ea.n_max_opt = exact->add_option("--n-max", ea.n_max, "largest n (default 12)");
  exact->add_option("--targets", ea.targets, "comma list of range, range+endpoint, trace, trace+endpoint");
  exact->add_flag("--rational", ea.rational, "exact rational probabilities in the dynamic program");
  ea.state_cap_opt = exact->add_option("--state-cap", ea.state_cap, "states held at once");
  ea.trace_n_max_opt = exact->add_option("--trace-n-max", ea.trace_n_max, "largest n for the trace tracks");

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimates");
  add_common(mc, common);
  ma.n_opt = mc->add_option("--n", ma.n, "walk length (default 8)");
  ma.samples_opt = mc->add_option("--samples", ma.samples, "sample paths (default 100000)");
  mc->add_option("--targets", ma.targets,
                 "comma list of range, range+endpoint, trace, trace+endpoint, escape, mean-range");
  mc->add_option("--method", ma.method, "plug-in or miller-madow")->capture_default_str();
  ma.streams_opt = mc->add_option("--streams", ma.streams, "sample streams (default 64)");
  ma.horizon_opt = mc->add_option("--horizon", ma.horizon, "escape horizon (default 10000)");

  ClassifyArgs ca;
  auto* cl = app.add_subcommand("classify", "walk class and vanishing predictions");
  add_common(cl, common);
  cl->add_flag("--mc-evidence", ca.mc_evidence, "attach a Monte Carlo escape estimate");
  cl->add_option("--horizon", ca.horizon, "escape horizon")->capture_default_str();
  cl->add_option("--samples", ca.samples, "escape samples")->capture_default_str();
  ca.n_max_opt = cl->add_option("--n-max", ca.n_max, "check the exact sequence up to n_max against the predictions");
  ca.trace_lower_bound_opt =
      cl->add_option("--trace-lower-bound", ca.trace_lower_bound, "lower bound c for H(Gamma_n,S_n)/n");

  LadderArgs la;
  auto* ladder = app.add_subcommand("ladder", "law of the supremum of a no-left-jump walk");
  add_common(ladder, common);
  la.n_opt = ladder->add_option("--n", la.n, "largest n of the f-table (default 200)");
  ladder->add_option("--t-grid", la.t_grid, "generating-function grid a:b:k")->capture_default_str();
  ladder->add_option("--mc-samples", la.mc_samples, "Monte Carlo check of the law (0 = off)")->capture_default_str();
  la.horizon_opt = ladder->add_option("--horizon", la.horizon, "Monte Carlo horizon (default 10000)");

  CodecArgs da;
  auto* codec = app.add_subcommand("codec-fuzz", "trace code round trip and injectivity");
  add_common(codec, common);
  codec->add_option("--trajectories", da.trajectories, "trajectories per measure")->capture_default_str();
  codec->add_option("--max-n", da.max_n, "longest trajectory")->capture_default_str();
  codec->add_option("--entropy-n", da.entropy_n, "n for the key entropy comparison")->capture_default_str();

  CheckArgs ka;
  auto* check = app.add_subcommand("check", "named property suites");
  add_common(check, common);
  check->add_option("--suite", ka.suites, "subadditivity, reversal, lemma31, lemma61, boundary, aep or all");
  ka.n_max_opt = check->add_option("--n-max", ka.n_max, "largest n");
  ka.cond_n_max_opt = check->add_option("--cond-n-max", ka.cond_n_max, "largest n for the conditional ln^2 bound");
  check->add_option("--cases", ka.cases, "random cases for lemma31 and lemma61")->capture_default_str();
  check->add_option("--trajectories", ka.trajectories, "trajectories for aep")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  for (auto* sub : app.get_subcommands()) {
    common.workers_opt = sub->get_option("--workers");
    common.seed_opt = sub->get_option("--seed");
  }

  try {
    if (exact->parsed()) return run_exact(common, ea);
    if (mc->parsed()) return run_mc(common, ma);
    if (cl->parsed()) return run_classify(common, ca);
    if (ladder->parsed()) return run_ladder(common, la);
    if (codec->parsed()) return run_codec(common, da);
    if (check->parsed()) return run_check(common, ka);
    return kInvalid;
  } catch (const ConfigError& e) {
    return report("config", e, kInvalid);
  } catch (const ResourceError& e) {
    return report("resource", e, kResource);
  } catch (const ValidationError& e) {
    return report("validation", e, kInvalid);
  } catch (const DescriptorMismatch& e) {
    return report("validation", e, kInvalid);
  } catch (const UnsupportedError& e) {
    return report("unsupported", e, kInvalid);
  } catch (const PrecisionError& e) {
    return report("precision", e, kInvalid);
  } catch (const std::exception& e) {
    return report("internal", e, kInternal);
  }
}

}  // namespace rangewalk::cli
