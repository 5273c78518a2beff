#include "config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "rangewalk/rational.hpp"

namespace rangewalk::cli {

using nlohmann::ordered_json;

namespace {

std::string location(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

void only_keys(const ordered_json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const ordered_json& require(const ordered_json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where, "missing key \"" + key + "\"");
  return obj.at(key);
}

std::uint64_t unsigned_field(const ordered_json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(where, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::int64_t integer_field(const ordered_json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    throw ConfigError(where, "integer out of range");
  return v.get<std::int64_t>();
}

GroupDescriptor parse_group(const ordered_json& g) {
  if (!g.is_object()) throw ConfigError("group", "expected an object");
  const auto& kind = require(g, "kind", "group");
  if (!kind.is_string()) throw ConfigError("group.kind", "expected a string");
  const auto k = kind.get<std::string>();
  GroupDescriptor d;
  if (k == "Z") {
    only_keys(g, {"kind"}, "group");
    d = GroupDescriptor::integer_line();
  } else if (k == "Zd") {
    only_keys(g, {"kind", "d"}, "group");
    d = GroupDescriptor::lattice(unsigned_field(require(g, "d", "group"), "group.d"));
  } else if (k == "free") {
    only_keys(g, {"kind", "rank"}, "group");
    const auto rank = unsigned_field(require(g, "rank", "group"), "group.rank");
    if (rank > 26) throw ConfigError("group.rank", "at most 26 generators (letters a..z)");
    d = GroupDescriptor::free_group(rank);
  } else if (k == "cyclic") {
    only_keys(g, {"kind", "moduli"}, "group");
    const auto& m = require(g, "moduli", "group");
    if (!m.is_array()) throw ConfigError("group.moduli", "expected an array of integers");
    std::vector<std::int64_t> moduli;
    for (std::size_t i = 0; i < m.size(); ++i)
      moduli.push_back(integer_field(m[i], "group.moduli[" + std::to_string(i) + "]"));
    d = GroupDescriptor::cyclic_product(std::move(moduli));
  } else {
    throw ConfigError("group.kind", "expected one of \"Z\", \"Zd\", \"free\", \"cyclic\"");
  }
  try {
    d.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("group", e.what());
  }
  return d;
}

}  // namespace

GroupElement parse_element(const Group& group, const ordered_json& value, const std::string& where) {
  const auto& d = group.descriptor();
  switch (d.kind) {
    case GroupKind::IntegerLine:
      return GroupElement::integer(integer_field(value, where));
    case GroupKind::IntegerLattice:
    case GroupKind::FiniteCyclicProduct: {
      const std::size_t dim = d.kind == GroupKind::IntegerLattice ? d.parameter : d.moduli.size();
      if (!value.is_array() || value.size() != dim)
        throw ConfigError(where, "expected an array of " + std::to_string(dim) + " integers");
      std::vector<std::int64_t> coords;
      for (std::size_t i = 0; i < dim; ++i) coords.push_back(integer_field(value[i], where + "[" + std::to_string(i) + "]"));
      if (d.kind == GroupKind::IntegerLattice) return GroupElement::lattice(coords);
      for (std::size_t i = 0; i < dim; ++i) coords[i] = ((coords[i] % d.moduli[i]) + d.moduli[i]) % d.moduli[i];
      return GroupElement::residues(coords);
    }
    case GroupKind::FreeGroup: {
      if (!value.is_string()) throw ConfigError(where, "expected a word over a..z (uppercase = inverse)");
      const auto text = value.get<std::string>();
      std::vector<std::int64_t> letters;
      for (char c : text) {
        const bool upper = std::isupper(static_cast<unsigned char>(c)) != 0;
        const int lower = std::tolower(static_cast<unsigned char>(c));
        if (lower < 'a' || lower > 'z') throw ConfigError(where, "invalid letter '" + std::string(1, c) + "'");
        const std::int64_t gen = lower - 'a' + 1;
        if (static_cast<std::size_t>(gen) > d.parameter)
          throw ConfigError(where, "letter '" + std::string(1, c) + "' exceeds the rank");
        letters.push_back(upper ? -gen : gen);
      }
      return group.canonicalize(GroupElement::word(letters));
    }
  }
  throw ConfigError(where, "unsupported group");
}

ordered_json element_json(const Group& group, const GroupElement& g) {
  switch (group.kind()) {
    case GroupKind::IntegerLine:
      return g.value();
    case GroupKind::FreeGroup: {
      std::string s;
      for (auto l : g.payload()) {
        const char c = static_cast<char>('a' + (l > 0 ? l : -l) - 1);
        s.push_back(l > 0 ? c : static_cast<char>(std::toupper(c)));
      }
      return s;
    }
    default: {
      ordered_json a = ordered_json::array();
      for (auto x : g.payload()) a.push_back(x);
      return a;
    }
  }
}

RunConfig parse_config_text(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(location(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
  }
  if (!doc.is_object()) throw ConfigError("(root)", "expected an object");
  only_keys(doc, {"group", "mu", "seed", "arithmetic", "n", "n_max", "samples", "horizon", "workers", "streams",
                  "state_cap", "targets"},
            "");

  RunConfig c;
  c.source = doc;
  c.group = parse_group(require(doc, "group", "(root)"));
  const Group group(c.group);

  if (doc.contains("seed")) c.seed = unsigned_field(doc["seed"], "seed");
  if (doc.contains("arithmetic")) {
    const auto& a = doc["arithmetic"];
    if (a == "double") {
      c.arithmetic = Arithmetic::Double;
    } else if (a == "rational") {
      c.arithmetic = Arithmetic::Rational;
    } else {
      throw ConfigError("arithmetic", "expected \"double\" or \"rational\"");
    }
  }
  auto opt_unsigned = [&](const char* key, auto& field) {
    if (doc.contains(key)) field = unsigned_field(doc[key], key);
  };
  opt_unsigned("n", c.n);
  opt_unsigned("n_max", c.n_max);
  opt_unsigned("samples", c.samples);
  opt_unsigned("horizon", c.horizon);
  opt_unsigned("workers", c.workers);
  opt_unsigned("streams", c.streams);
  opt_unsigned("state_cap", c.state_cap);
  if (doc.contains("targets")) {
    const auto& t = doc["targets"];
    if (!t.is_array()) throw ConfigError("targets", "expected an array of strings");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_string()) throw ConfigError("targets[" + std::to_string(i) + "]", "expected a string");
      c.targets.push_back(t[i].get<std::string>());
    }
  }

  const auto& mu = require(doc, "mu", "(root)");
  if (!mu.is_array() || mu.empty()) throw ConfigError("mu", "expected a non-empty array");
  bool any_string = false;
  for (const auto& entry : mu) any_string = any_string || (entry.is_object() && entry.contains("prob") && entry["prob"].is_string());
  const bool exact = c.arithmetic == Arithmetic::Rational || any_string;

  std::vector<Atom> atoms;
  std::vector<std::pair<GroupElement, Rational>> exact_atoms;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const std::string where = "mu[" + std::to_string(i) + "]";
    const auto& entry = mu[i];
    if (!entry.is_object()) throw ConfigError(where, "expected {\"elem\": ..., \"prob\": ...}");
    only_keys(entry, {"elem", "prob"}, where);
    GroupElement g;
    try {
      g = parse_element(group, require(entry, "elem", where), where + ".elem");
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ConfigError(where + ".elem", e.what());
    }
    const auto& p = require(entry, "prob", where);
    if (exact) {
      Rational r;
      try {
        if (p.is_string()) {
          r = parse_rational(p.get<std::string>());
        } else if (p.is_number()) {
          r = rational_from_double(p.get<double>());
        } else {
          throw ConfigError(where + ".prob", "expected a number or a rational string");
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(where + ".prob", e.what());
      }
      exact_atoms.emplace_back(g, r);
    } else {
      if (!p.is_number()) throw ConfigError(where + ".prob", "expected a number");
      atoms.push_back({g, p.get<double>()});
    }
  }
  try {
    if (exact) {
      c.mu = StepDistribution::from_exact(c.group, std::move(exact_atoms));
    } else {
      c.mu = StepDistribution(c.group, std::move(atoms));
    }
  } catch (const ValidationError& e) {
    throw ConfigError("mu", e.what());
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ordered_json config_json(const RunConfig& config) {
  ordered_json out = config.source;
  const Group& group = config.measure().group();
  ordered_json atoms = ordered_json::array();
  const auto exact = config.measure().exact();
  for (std::size_t i = 0; i < config.measure().size(); ++i) {
    const auto& a = config.measure().atoms()[i];
    ordered_json atom{{"elem", element_json(group, a.element)}, {"prob", a.probability}};
    if (!exact.empty()) atom["exact"] = to_string(exact[i]);
    atoms.push_back(atom);
  }
  out["resolved_mu"] = atoms;
  out["seed"] = config.seed;
  return out;
}

}  // namespace rangewalk::cli
