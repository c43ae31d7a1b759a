#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgdpce {

/// Parse or validation failure, with the offending line (0 if not from a
/// file) and key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string &message, std::size_t line = 0,
              std::string key = {});
  std::size_t line() const { return line_; }
  const std::string &key() const { return key_; }

private:
  std::size_t line_;
  std::string key_;
};

enum class ValueType { Integer, Real, Text, RealList, IntegerList };

struct ConfigKey {
  std::string section;
  std::string name;
  ValueType type;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices; // empty: any value of the type
};

/// The full schema, in serialization order.
const std::vector<ConfigKey> &config_schema();

/// Experiment configuration: every schema key has a value. Text form:
///
///   # comment
///   [section]
///   key = value
///
/// Keys are addressed as "section.key".
class ExperimentConfig {
public:
  /// Schema defaults adjusted for the experiment id.
  static ExperimentConfig defaults(const std::string &experiment);
  static ExperimentConfig parse(const std::string &text);
  static ExperimentConfig load(const std::string &path);

  /// Canonical text form; parse(serialize()) == *this.
  std::string serialize() const;

  /// Applies "section.key=value". Throws ConfigError for unknown keys or
  /// malformed values.
  void set(const std::string &qualified_key, const std::string &value,
           std::size_t line = 0);
  void apply_override(const std::string &assignment);

  const std::string &text(const std::string &qualified_key) const;
  long long integer(const std::string &qualified_key) const;
  std::size_t count(const std::string &qualified_key) const;
  double real(const std::string &qualified_key) const;
  std::vector<double> reals(const std::string &qualified_key) const;
  std::vector<long long> integers(const std::string &qualified_key) const;

  std::string experiment() const { return text("experiment.id"); }
  std::uint64_t seed() const;

  /// FNV-1a 64 of serialize(), as 16 hex digits.
  std::string hash() const;

  friend bool operator==(const ExperimentConfig &,
                         const ExperimentConfig &) = default;

private:
  std::map<std::string, std::string> values_;
};

const std::vector<std::string> &experiment_ids();

} // namespace sgdpce
