#include "sgdpce/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sgdpce {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    items.push_back(trim(item));
  }
  return items;
}

bool parse_integer(const std::string &s, long long &out) {
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

bool parse_real(const std::string &s, double &out) {
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

std::string join(const std::vector<std::string> &items, const char *sep) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    out += (k ? sep : "") + items[k];
  }
  return out;
}

const ConfigKey &find_key(const std::string &qualified, std::size_t line) {
  const auto dot = qualified.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("key '" + qualified + "' must be written section.key",
                      line, qualified);
  }
  const auto section = qualified.substr(0, dot);
  const auto name = qualified.substr(dot + 1);
  for (const auto &key : config_schema()) {
    if (key.section == section && key.name == name) {
      return key;
    }
  }
  throw ConfigError("unknown key '" + qualified + "'", line, qualified);
}

} // namespace

ConfigError::ConfigError(const std::string &message, std::size_t line,
                         std::string key)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                        message
                                  : message),
      line_(line), key_(std::move(key)) {}

const std::vector<std::string> &experiment_ids() {
  static const std::vector<std::string> ids = {
      "table1",        "table2",  "table3",
      "fig-convergence", "fig-cdf", "fig-staged-hessian",
      "fig-batch-study", "solve"};
  return ids;
}

const std::vector<ConfigKey> &config_schema() {
  using T = ValueType;
  static const std::vector<ConfigKey> schema = {
      {"experiment", "id", T::Text, "solve", "experiment to run",
       experiment_ids()},
      {"experiment", "seed", T::Integer, "1", "root seed of all germ streams", {}},
      {"experiment", "output", T::Text, "out", "output directory", {}},

      {"problem", "kind", T::Text, "linear_homogeneous", "builtin problem",
       {"linear_homogeneous", "linear_nonhomogeneous",
        "semilinear_homogeneous_field", "semilinear_nonhomogeneous_field"}},
      {"problem", "beta", T::Real, "0.1", "log-field amplitude", {}},
      {"problem", "n_v", T::Integer, "2", "harmonic pairs (germ size 2 n_v)", {}},
      {"problem", "length", T::Real, "10", "domain length l, D = [-l/2, l/2]", {}},
      {"problem", "interior", T::Integer, "50", "interior FEM nodes M", {}},
      {"problem", "degree", T::Integer, "3", "total PC degree p", {}},

      {"sgd", "iterations", T::Integer, "500", "SGD iterations", {}},
      {"sgd", "batch_gradient", T::Integer, "128", "gradient mini-batch", {}},
      {"sgd", "batch_hessian", T::Integer, "64", "Hessian mini-batch", {}},
      {"sgd", "rate_numerator", T::Real, "5", "eta_n = numerator / (offset + n)", {}},
      {"sgd", "rate_offset", T::Real, "2", "", {}},
      {"sgd", "rate_clip", T::Real, "0", "cap on eta_n, 0 = none", {}},
      {"sgd", "cv_mode", T::Text, "none", "control variates",
       {"none", "order0", "order1"}},
      {"sgd", "cv_pilot", T::Integer, "1000", "pilot germs for CV multipliers", {}},
      {"sgd", "cv_refresh", T::Integer, "0", "re-estimate CV every R iterations, 0 = once", {}},
      {"sgd", "hessian", T::Text, "full", "preconditioner",
       {"none", "linear", "staged", "full"}},
      {"sgd", "switch_iteration", T::Integer, "100", "staged: last linear-only iteration", {}},
      {"sgd", "ridge", T::Real, "1e-8", "relative block regularization", {}},
      {"sgd", "init", T::Text, "zero", "initial coefficients", {"zero", "gaussian"}},
      {"sgd", "init_std", T::Real, "0.3", "std of gaussian initialization", {}},
      {"sgd", "monitor_stride", T::Integer, "10", "iterations between energy records, 0 = off", {}},
      {"sgd", "monitor_samples", T::Integer, "10000", "germs per energy record", {}},

      {"evaluation", "n_mc", T::Integer, "100000", "Monte Carlo samples", {}},
      {"evaluation", "points", T::RealList, "0.5", "CDF / error points", {}},
      {"evaluation", "threshold_count", T::Integer, "41", "CDF grid size per point", {}},
      {"evaluation", "betas", T::RealList, "0.1", "field amplitudes to sweep", {}},
      {"evaluation", "rates", T::RealList, "5", "learning-rate numerators to sweep", {}},
      {"evaluation", "degrees", T::IntegerList, "3", "PC degrees to sweep", {}},
      {"evaluation", "batches_gradient", T::IntegerList, "128", "paired with batches_hessian", {}},
      {"evaluation", "batches_hessian", T::IntegerList, "64", "", {}},
      {"evaluation", "tolerance", T::Real, "1e-3", "energy gap counted as converged", {}},
      {"evaluation", "cdf_tolerance", T::Real, "0.07", "Kolmogorov distance bound", {}},
  };
  return schema;
}

ExperimentConfig ExperimentConfig::defaults(const std::string &experiment) {
  ExperimentConfig c;
  for (const auto &key : config_schema()) {
    c.values_[key.section + "." + key.name] = key.default_value;
  }
  c.set("experiment.id", experiment);
  auto set_all = [&c](std::initializer_list<std::pair<const char *, const char *>> kv) {
    for (const auto &[k, v] : kv) {
      c.set(k, v);
    }
  };
  if (experiment == "table1") {
    set_all({{"problem.interior", "10"},
             {"sgd.init", "gaussian"},
             {"evaluation.betas", "0.05, 0.1, 0.2, 0.4"}});
  } else if (experiment == "table2") {
    set_all({{"sgd.init", "gaussian"},
             {"sgd.monitor_stride", "50"},
             {"evaluation.rates", "1, 2, 5, 10, 100"}});
  } else if (experiment == "table3") {
    set_all({{"problem.kind", "semilinear_homogeneous_field"},
             {"problem.length", "12"},
             {"problem.interior", "100"},
             {"sgd.iterations", "1000"},
             {"sgd.batch_gradient", "100"},
             {"sgd.batch_hessian", "100"},
             {"sgd.rate_numerator", "10"},
             {"sgd.rate_offset", "0"},
             {"sgd.monitor_stride", "100"},
             {"evaluation.degrees", "0, 1, 2, 3"}});
  } else if (experiment == "fig-convergence") {
    set_all({{"sgd.init", "gaussian"}, {"sgd.cv_mode", "order1"}});
  } else if (experiment == "fig-cdf") {
    set_all({{"problem.kind", "linear_nonhomogeneous"},
             {"sgd.cv_mode", "order1"},
             {"sgd.monitor_stride", "50"},
             {"evaluation.points", "-4, 2"}});
  } else if (experiment == "fig-staged-hessian") {
    set_all({{"problem.kind", "semilinear_nonhomogeneous_field"},
             {"problem.length", "12"},
             {"sgd.init", "gaussian"},
             {"sgd.hessian", "staged"}});
  } else if (experiment == "fig-batch-study") {
    set_all({{"problem.kind", "semilinear_nonhomogeneous_field"},
             {"problem.length", "12"},
             {"sgd.init", "gaussian"},
             {"sgd.hessian", "staged"},
             {"sgd.monitor_stride", "50"},
             {"evaluation.betas", "0.3, 0.4"},
             {"evaluation.batches_gradient", "128, 128, 256"},
             {"evaluation.batches_hessian", "64, 128, 64"}});
  }
  return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string &text) {
  // The id decides the defaults, so it is located first.
  std::string id = "solve";
  {
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
      line = trim(line);
      if (!line.empty() && line.front() == '[') {
        section = trim(line.substr(1, line.find(']') - 1));
      } else if (section == "experiment") {
        const auto eq = line.find('=');
        if (eq != std::string::npos && trim(line.substr(0, eq)) == "id") {
          id = trim(line.substr(eq + 1));
        }
      }
    }
  }
  if (std::find(experiment_ids().begin(), experiment_ids().end(), id) ==
      experiment_ids().end()) {
    throw ConfigError("unknown experiment id '" + id + "'", 0,
                      "experiment.id");
  }
  ExperimentConfig c = defaults(id);

  std::istringstream in(text);
  std::string raw, section;
  std::size_t number = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("malformed section header '" + line + "'", number);
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value', got '" + line + "'", number);
    }
    if (section.empty()) {
      throw ConfigError("key outside of any [section]", number);
    }
    const std::string qualified = section + "." + trim(line.substr(0, eq));
    if (auto it = seen.find(qualified); it != seen.end()) {
      throw ConfigError("duplicate key '" + qualified + "' (first on line " +
                            std::to_string(it->second) + ")",
                        number, qualified);
    }
    seen[qualified] = number;
    c.set(qualified, trim(line.substr(eq + 1)), number);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  std::string section;
  for (const auto &key : config_schema()) {
    if (key.section != section) {
      if (!section.empty()) {
        out << "\n";
      }
      section = key.section;
      out << "[" << section << "]\n";
    }
    out << key.name << " = " << values_.at(key.section + "." + key.name)
        << "\n";
  }
  return out.str();
}

void ExperimentConfig::set(const std::string &qualified_key,
                           const std::string &value, std::size_t line) {
  const ConfigKey &key = find_key(qualified_key, line);
  const std::string v = trim(value);
  auto fail = [&](const std::string &what) {
    throw ConfigError("invalid value '" + v + "' for '" + qualified_key +
                          "': " + what,
                      line, qualified_key);
  };
  long long i = 0;
  double r = 0.0;
  switch (key.type) {
  case ValueType::Integer:
    if (!parse_integer(v, i)) fail("expected an integer");
    if (i < 0) fail("must be non-negative");
    break;
  case ValueType::Real:
    if (!parse_real(v, r)) fail("expected a number");
    break;
  case ValueType::Text:
    if (v.empty()) fail("must not be empty");
    if (!key.choices.empty() &&
        std::find(key.choices.begin(), key.choices.end(), v) ==
            key.choices.end()) {
      fail("expected one of " + join(key.choices, ", "));
    }
    break;
  case ValueType::RealList:
    for (const auto &item : split_list(v)) {
      if (!parse_real(item, r)) fail("expected a comma-separated number list");
    }
    break;
  case ValueType::IntegerList:
    for (const auto &item : split_list(v)) {
      if (!parse_integer(item, i) || i < 0) {
        fail("expected a comma-separated list of non-negative integers");
      }
    }
    break;
  }
  values_[qualified_key] = v;
}

void ExperimentConfig::apply_override(const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment +
                      "' must have the form section.key=value");
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

const std::string &ExperimentConfig::text(const std::string &qualified_key) const {
  find_key(qualified_key, 0);
  return values_.at(qualified_key);
}

long long ExperimentConfig::integer(const std::string &qualified_key) const {
  long long out = 0;
  parse_integer(text(qualified_key), out);
  return out;
}

std::size_t ExperimentConfig::count(const std::string &qualified_key) const {
  return static_cast<std::size_t>(integer(qualified_key));
}

double ExperimentConfig::real(const std::string &qualified_key) const {
  double out = 0.0;
  parse_real(text(qualified_key), out);
  return out;
}

std::vector<double> ExperimentConfig::reals(const std::string &qualified_key) const {
  std::vector<double> out;
  for (const auto &item : split_list(text(qualified_key))) {
    double r = 0.0;
    parse_real(item, r);
    out.push_back(r);
  }
  return out;
}

std::vector<long long>
ExperimentConfig::integers(const std::string &qualified_key) const {
  std::vector<long long> out;
  for (const auto &item : split_list(text(qualified_key))) {
    long long i = 0;
    parse_integer(item, i);
    out.push_back(i);
  }
  return out;
}

std::uint64_t ExperimentConfig::seed() const {
  const std::string &s = text("experiment.seed");
  std::uint64_t out = 0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(h));
  return buffer;
}

} // namespace sgdpce
