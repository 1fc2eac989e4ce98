#pragma once

// Scenario configuration: a flat, diff-friendly `key = value` format with
// `#` comments. Parsing validates the whole file and reports every problem
// (with line numbers) in one go, never just the first error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "diraclab/common.hpp"

namespace diraclab {

struct ScenarioConfig {
  std::string kind;
  std::map<std::string, std::string> values;  // key -> trimmed raw text

  bool has(const std::string& key) const { return values.count(key) != 0; }

  double number(const std::string& key) const {
    return std::strtod(values.at(key).c_str(), nullptr);
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  int integer(const std::string& key) const {
    return static_cast<int>(std::strtol(values.at(key).c_str(), nullptr, 10));
  }
  int integer(const std::string& key, int fallback) const {
    return has(key) ? integer(key) : fallback;
  }
  std::string word(const std::string& key) const { return values.at(key); }
  std::string word(const std::string& key, const std::string& fallback) const {
    return has(key) ? values.at(key) : fallback;
  }
  std::vector<double> number_list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(values.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      out.push_back(std::strtod(item.c_str(), nullptr));
    }
    return out;
  }

  bool operator==(const ScenarioConfig& o) const {
    return kind == o.kind && values == o.values;
  }
};

namespace detail {

enum class KeyType { Number, Integer, Word, NumberList };
enum class KeyConstraint { None, Positive, NonNegative, PlusMinusOne };

struct KeySpec {
  const char* key;
  KeyType type;
  KeyConstraint constraint;
  const char* kinds;  // space-separated applicable kinds, "*" = all
  const char* words;  // allowed values for Word keys, '|'-separated
  bool required;      // required for every kind it applies to
};

inline const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = {
      {"kind", KeyType::Word, KeyConstraint::None, "*",
       "evolve|klein|sweep|spectrum|ion|orbits", true},
      // grid (presence enforced per scenario by the runner: the
      // oscillator-ladder spectrum needs no grid)
      {"n", KeyType::Integer, KeyConstraint::Positive,
       "evolve klein sweep spectrum ion orbits", "", false},
      {"x_min", KeyType::Number, KeyConstraint::None,
       "evolve klein sweep spectrum ion orbits", "", false},
      {"x_max", KeyType::Number, KeyConstraint::None,
       "evolve klein sweep spectrum ion orbits", "", false},
      // physical parameters
      {"hbar", KeyType::Number, KeyConstraint::Positive, "*", "", false},
      {"m", KeyType::Number, KeyConstraint::NonNegative,
       "evolve klein sweep spectrum orbits", "", false},
      {"c", KeyType::Number, KeyConstraint::Positive,
       "evolve klein sweep spectrum orbits", "", false},
      {"q_sign", KeyType::Number, KeyConstraint::PlusMinusOne,
       "evolve klein sweep ion orbits", "", false},
      {"v_sc", KeyType::Number, KeyConstraint::None,
       "evolve spectrum", "", false},
      {"v_el", KeyType::Number, KeyConstraint::None,
       "evolve klein sweep", "", false},
      {"v_mag", KeyType::Number, KeyConstraint::None, "evolve", "", false},
      {"v_ps", KeyType::Number, KeyConstraint::None,
       "evolve orbits", "", false},
      // packet
      {"x0", KeyType::Number, KeyConstraint::None,
       "evolve klein sweep ion orbits", "", false},
      {"p0", KeyType::Number, KeyConstraint::None,
       "evolve klein sweep ion orbits", "", false},
      {"width", KeyType::Number, KeyConstraint::Positive,
       "evolve klein sweep ion orbits", "", false},
      {"branch", KeyType::Word, KeyConstraint::None,
       "evolve klein sweep ion orbits", "positive|negative|upper", false},
      // evolution
      {"t_final", KeyType::Number, KeyConstraint::NonNegative,
       "evolve klein sweep ion orbits", "", true},
      {"dt", KeyType::Number, KeyConstraint::Positive,
       "evolve klein sweep ion orbits", "", false},
      {"frame_stride", KeyType::Integer, KeyConstraint::Positive,
       "evolve klein sweep orbits", "", false},
      // scattering
      {"solver", KeyType::Word, KeyConstraint::None, "klein sweep",
       "split|comoving", false},
      {"method", KeyType::Word, KeyConstraint::None, "klein sweep",
       "branch|spatial", false},
      {"x_cut", KeyType::Number, KeyConstraint::None, "klein sweep", "",
       false},
      {"mode_dt", KeyType::Number, KeyConstraint::Positive, "klein sweep",
       "", false},
      {"masses", KeyType::NumberList, KeyConstraint::None, "sweep", "",
       true},
      // spectrum
      {"problem", KeyType::Word, KeyConstraint::None, "spectrum",
       "scalar|oscillator", true},
      {"count", KeyType::Integer, KeyConstraint::Positive, "spectrum", "",
       false},
      {"omega", KeyType::Number, KeyConstraint::Positive, "spectrum", "",
       false},
      {"fock_n_max", KeyType::Integer, KeyConstraint::Positive, "spectrum",
       "", false},
      // ion
      {"eta", KeyType::Number, KeyConstraint::Positive, "ion", "", true},
      {"omega_b", KeyType::Number, KeyConstraint::NonNegative, "ion", "",
       true},
      {"omega_r", KeyType::Number, KeyConstraint::NonNegative, "ion", "",
       true},
      {"phi_b", KeyType::Number, KeyConstraint::None, "ion", "", false},
      {"phi_r", KeyType::Number, KeyConstraint::None, "ion", "", false},
      {"omega_2", KeyType::Number, KeyConstraint::NonNegative, "ion", "",
       true},
      {"omega_carrier", KeyType::Number, KeyConstraint::NonNegative, "ion",
       "", true},
      {"omega_sc", KeyType::Number, KeyConstraint::NonNegative, "ion", "",
       false},
      {"omega_trap", KeyType::Number, KeyConstraint::Positive, "ion", "",
       false},
      {"delta", KeyType::Number, KeyConstraint::Positive, "ion", "", false},
      {"ion_n_max", KeyType::Integer, KeyConstraint::Positive, "ion", "",
       true},
      {"ancilla", KeyType::Word, KeyConstraint::None, "ion",
       "plus|minus|full", false},
      {"sample_dt", KeyType::Number, KeyConstraint::Positive, "ion", "",
       true},
  };
  return schema;
}

inline const KeySpec* find_key_spec(const std::string& key) {
  for (const auto& s : config_schema())
    if (key == s.key) return &s;
  return nullptr;
}

inline bool spec_applies(const KeySpec& s, const std::string& kind) {
  if (std::string(s.kinds) == "*") return true;
  std::stringstream ss(s.kinds);
  std::string k;
  while (ss >> k)
    if (k == kind) return true;
  return false;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_full_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

inline bool parse_full_int(const std::string& s, long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtol(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

inline bool word_allowed(const KeySpec& spec, const std::string& v) {
  std::stringstream ss(spec.words);
  std::string w;
  while (std::getline(ss, w, '|'))
    if (w == v) return true;
  return false;
}

// Type/constraint check for a single value; empty return means OK.
inline std::string check_value(const KeySpec& spec, const std::string& v) {
  auto constraint_ok = [&](double x) -> std::string {
    switch (spec.constraint) {
      case KeyConstraint::Positive:
        if (!(x > 0.0)) return "must be > 0";
        break;
      case KeyConstraint::NonNegative:
        if (!(x >= 0.0)) return "must be >= 0";
        break;
      case KeyConstraint::PlusMinusOne:
        if (x != 1.0 && x != -1.0) return "must be +1 or -1";
        break;
      case KeyConstraint::None:
        break;
    }
    return "";
  };
  switch (spec.type) {
    case KeyType::Number: {
      double x;
      if (!parse_full_double(v, x)) return "expected a number";
      return constraint_ok(x);
    }
    case KeyType::Integer: {
      long x;
      if (!parse_full_int(v, x)) return "expected an integer";
      return constraint_ok(static_cast<double>(x));
    }
    case KeyType::Word:
      if (!word_allowed(spec, v))
        return "must be one of: " + std::string(spec.words);
      return "";
    case KeyType::NumberList: {
      std::stringstream ss(v);
      std::string item;
      int count = 0;
      while (std::getline(ss, item, ',')) {
        double x;
        if (!parse_full_double(trim(item), x))
          return "expected a comma-separated list of numbers";
        ++count;
      }
      if (count == 0) return "expected a non-empty list of numbers";
      return "";
    }
  }
  return "";
}

}  // namespace detail

// Parses and validates configuration text. On any problem, throws a
// validation_error whose message lists every error found, one per line,
// each tagged with its line number where applicable.
inline ScenarioConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  std::map<std::string, int> first_line;  // key -> line of first definition
  ScenarioConfig cfg;

  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = detail::trim(
        hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) +
                       ": expected `key = value`");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      errors.push_back("line " + std::to_string(line_no) +
                       ": empty key or value");
      continue;
    }

    const auto prev = first_line.find(key);
    if (prev != first_line.end()) {
      errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" +
                       key + "' (first defined on line " +
                       std::to_string(prev->second) + ")");
      continue;
    }
    first_line[key] = line_no;

    const detail::KeySpec* spec = detail::find_key_spec(key);
    if (spec == nullptr) {
      errors.push_back("line " + std::to_string(line_no) + ": unknown key '" +
                       key + "'");
      continue;
    }
    const std::string problem = detail::check_value(*spec, value);
    if (!problem.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": key '" + key +
                       "' " + problem);
      continue;
    }
    if (key == "kind")
      cfg.kind = value;
    else
      cfg.values[key] = value;
  }

  if (cfg.kind.empty()) {
    errors.push_back(
        "missing required key 'kind' (one of "
        "evolve|klein|sweep|spectrum|ion|orbits)");
  } else {
    // Keys must apply to this kind; required keys must be present.
    for (const auto& kv : cfg.values) {
      const detail::KeySpec* spec = detail::find_key_spec(kv.first);
      if (spec && !detail::spec_applies(*spec, cfg.kind))
        errors.push_back("line " + std::to_string(first_line[kv.first]) +
                         ": key '" + kv.first + "' is not valid for kind '" +
                         cfg.kind + "'");
    }
    for (const auto& spec : detail::config_schema()) {
      if (!spec.required || std::string(spec.key) == "kind") continue;
      if (detail::spec_applies(spec, cfg.kind) && !cfg.has(spec.key))
        errors.push_back("missing required key '" + std::string(spec.key) +
                         "' for kind '" + cfg.kind + "'");
    }
  }

  if (!errors.empty()) {
    std::string msg = "configuration invalid:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw validation_error(msg);
  }
  return cfg;
}

// Canonical form: `kind` first, remaining keys sorted. parse(serialize(c))
// reproduces c exactly.
inline std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out = "kind = " + cfg.kind + "\n";
  for (const auto& kv : cfg.values)
    out += kv.first + " = " + kv.second + "\n";
  return out;
}

}  // namespace diraclab
