#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rangewalk/error.hpp"
#include "rangewalk/groups.hpp"

namespace rangewalk::cli {

/// Malformed or schema-violating configuration. `where` is "line L, column C"
/// for syntax errors and a field path such as "mu[1].prob" otherwise.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string where, const std::string& message)
      : ValidationError(where + ": " + message), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

enum class Arithmetic { Double, Rational };

struct RunConfig {
  GroupDescriptor group;
  std::optional<StepDistribution> mu;
  std::uint64_t seed = 0;
  Arithmetic arithmetic = Arithmetic::Double;

  // Command parameters; command-line flags take precedence.
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_max;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> horizon;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> streams;
  std::optional<std::size_t> state_cap;
  std::vector<std::string> targets;

  /// The document as read.
  nlohmann::ordered_json source;

  const StepDistribution& measure() const { return *mu; }
};

/// Reads and validates a JSON configuration. Unknown keys are rejected.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(std::string_view text);

/// Element syntax of the config: integer (Z), integer array (Zd, cyclic),
/// word over a..z with uppercase inverses (free; "" is the identity).
GroupElement parse_element(const Group& group, const nlohmann::ordered_json& value, const std::string& where);

/// The same syntax as JSON.
nlohmann::ordered_json element_json(const Group& group, const GroupElement& g);

/// The resolved configuration, echoed into manifests.
nlohmann::ordered_json config_json(const RunConfig& config);

}  // namespace rangewalk::cli
