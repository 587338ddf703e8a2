#pragma once

#include <cerrno>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "benthic/error.hpp"

namespace benthic {

/// Flat section.key -> value store over a closed schema. Values are kept as
/// text and converted on access; the echo of every effective value is what
/// ends up in CSV headers.
class RunConfig {
 public:
  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"preset", ""},
        {"model.L", "10"},
        {"model.d", "0.02"},
        {"model.q", "0"},
        {"model.mu", "0.04"},
        {"model.sigma", "0.2"},
        {"model.m1", "0.02"},
        {"model.m2", "0.02"},
        {"model.b_u", "0"},
        {"model.b_d", "0"},
        {"model.growth", "strong_allee"},
        {"model.threshold", "0.4"},
        {"model.rate", "0.09"},
        {"model.weak_b", "0.2"},
        {"model.geometry", "uniform"},
        {"model.A_b", "1"},
        {"model.A_d", "1"},
        {"grid.n", "400"},
        {"run.dt", "0.05"},
        {"run.t_max", "5000"},
        {"run.conv_tol", "1e-9"},
        {"run.extinct_tol", "1e-6"},
        {"run.sample_stride", "20"},
        {"run.record_energy", "false"},
        {"run.newton", "true"},
        {"run.initial", "constant"},
        {"run.u0", "0.2"},
        {"run.v0", "0.2"},
        {"run.u0_right", "0"},
        {"run.v0_right", "0"},
        {"run.split", "0.5"},
        {"run.state", "max"},
        {"run.seed", "1"},
        {"sweep.variable", "mu"},
        {"sweep.from", "0.01"},
        {"sweep.to", "0.4"},
        {"sweep.count", "40"},
        {"sweep.bc", "NF/H,NF/FF,NF/NF"},
    };
    return d;
  }

  RunConfig() : values_(defaults()) {}

  static bool known(const std::string& key) { return defaults().count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    if (!known(key)) throw Error(ErrorCode::SchemaError, "unknown key '" + key + "'");
    values_[key] = value;
  }

  const std::string& text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorCode::SchemaError, "unknown key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const {
    const std::string& s = text(key);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
      throw Error(ErrorCode::SchemaError, "key '" + key + "' expects a number, got '" + s + "'");
    }
    return v;
  }

  long integer(const std::string& key) const {
    const double v = number(key);
    if (v != static_cast<double>(static_cast<long>(v))) {
      throw Error(ErrorCode::SchemaError, "key '" + key + "' expects an integer, got '" + text(key) + "'");
    }
    return static_cast<long>(v);
  }

  bool flag(const std::string& key) const {
    const std::string& s = text(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error(ErrorCode::SchemaError, "key '" + key + "' expects a boolean, got '" + s + "'");
  }

  /// "key = value" lines in sorted key order.
  std::vector<std::string> echo() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.push_back(k + " = " + v);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Reads section-structured "key = value" text via the Boost INI reader.
/// Lines starting with '#' or ';' are comments; keys before any section
/// header are top level (only "preset").
inline std::vector<ConfigEntry> parse_entries(const std::string& text) {
  static const std::set<std::string> sections = {"model", "grid", "run", "sweep"};
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<ConfigEntry> out;
  auto add = [&](const std::string& key, const std::string& value) {
    if (!RunConfig::known(key)) throw Error(ErrorCode::SchemaError, "unknown key '" + key + "'");
    out.push_back({key, detail::trim(value)});
  };
  for (const auto& [name, node] : tree) {
    if (sections.count(name)) {
      for (const auto& [key, leaf] : node) {
        if (!leaf.empty()) throw Error(ErrorCode::ParseError, "nested key under '" + name + "." + key + "'");
        add(name + "." + key, leaf.data());
      }
    } else if (!node.empty()) {
      throw Error(ErrorCode::SchemaError, "unknown section '" + name + "'");
    } else {
      add(name, node.data());
    }
  }
  return out;
}

/// Values a named preset fixes on top of the defaults.
inline std::map<std::string, std::string> preset_values(const std::string& name) {
  if (name == "fig_biomass_vs_mu") {
    return {{"model.q", "0.2"}, {"sweep.variable", "mu"}, {"sweep.from", "0.01"}, {"sweep.to", "0.4"},
            {"sweep.count", "40"}, {"run.u0", "0.2"}, {"run.v0", "0.2"}, {"run.t_max", "50000"}};
  }
  if (name == "fig_profiles_vs_mu") {
    return {{"model.q", "0.2"}, {"sweep.variable", "mu"}, {"sweep.from", "0.01"}, {"sweep.to", "0.06"},
            {"sweep.count", "6"}, {"run.u0", "0.2"}, {"run.v0", "0.2"}, {"run.t_max", "50000"}};
  }
  if (name == "fig_profiles_vs_q") {
    return {{"model.mu", "0.04"}, {"sweep.variable", "q"}, {"sweep.from", "0.1"}, {"sweep.to", "0.4"},
            {"sweep.count", "4"}, {"run.u0", "0.2"}, {"run.v0", "0.2"}, {"run.t_max", "50000"}};
  }
  if (name == "fig_bistable_ff") {
    return {{"model.q", "0.11"}, {"model.mu", "0.04"}, {"model.b_u", "0"}, {"model.b_d", "1"}};
  }
  if (name == "fig_bistable_nfnf") {
    return {{"model.q", "0.025"}, {"model.mu", "0.1"}, {"model.b_u", "0"}, {"model.b_d", "0"}};
  }
  if (name == "fig_bistable_hetero") {
    return {{"model.q", "0.025"}, {"model.mu", "0.1"}, {"model.b_u", "0"}, {"model.b_d", "0"},
            {"model.geometry", "sinusoidal"}};
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig_biomass_vs_mu", "fig_profiles_vs_mu", "fig_profiles_vs_q",
                                                 "fig_bistable_ff",   "fig_bistable_nfnf",  "fig_bistable_hetero"};
  return names;
}

/// Effective configuration: defaults, then the preset (from the overrides
/// or the file), then file values, then overrides.
inline RunConfig resolve_config(const std::string& file_text,
                                const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  const std::vector<ConfigEntry> entries = parse_entries(file_text);
  std::string preset;
  for (const auto& e : entries) if (e.key == "preset") preset = e.value;
  for (const auto& [k, v] : overrides) if (k == "preset") preset = v;
  RunConfig cfg;
  if (!preset.empty()) {
    for (const auto& [k, v] : preset_values(preset)) cfg.set(k, v);
    cfg.set("preset", preset);
  }
  for (const auto& e : entries) cfg.set(e.key, e.value);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  return cfg;
}

inline RunConfig parse_config(const std::string& text) { return resolve_config(text); }

}  // namespace benthic
