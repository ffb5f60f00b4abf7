#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclap/maximizer.hpp"

namespace fraclap {

// Config or input-file problem: maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::pair<double, double>> domain;
  double h = 0.0;
  std::vector<double> s_values;  // one entry unless sweeping
  double beta = 0.0;
  bool has_beta = false;
  AscentOptions opts;
  std::uint64_t brute_limit = 10'000'000;
  std::string f_source = "ones";  // "ones" or a CSV path (solve command)
  std::string out_dir;            // optional; CLI --out overrides
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number())
    throw ConfigError("config: field '" + key + "' must be a number");
  return j.get<double>();
}

inline std::int64_t require_integer(const nlohmann::json& j,
                                    const std::string& key) {
  if (!j.is_number_integer())
    throw ConfigError("config: field '" + key + "' must be an integer");
  return j.get<std::int64_t>();
}

inline void check_s(double s) {
  if (!(s > 0.0 && s < 1.0))
    throw ConfigError("config: field 's' must lie strictly in (0, 1), got " +
                      std::to_string(s));
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  static const std::set<std::string> known = {
      "domain", "h",    "s",          "beta",        "max_iter", "restarts",
      "seed",   "init", "solver_tol", "brute_limit", "f",        "out"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      throw ConfigError("config: unknown key '" + key + "'");
  }

  RunConfig cfg;

  if (!j.contains("domain") || !j.at("domain").is_array() ||
      j.at("domain").empty())
    throw ConfigError("config: field 'domain' must be a nonempty array of [left, right] pairs");
  for (const auto& pair : j.at("domain")) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number())
      throw ConfigError("config: field 'domain' entries must be [left, right] number pairs");
    const double l = pair[0].get<double>();
    const double r = pair[1].get<double>();
    if (!(r > l))
      throw ConfigError("config: field 'domain' interval must have right > left");
    cfg.domain.emplace_back(l, r);
  }

  if (!j.contains("h")) throw ConfigError("config: missing field 'h'");
  cfg.h = detail::require_number(j.at("h"), "h");
  if (!(cfg.h > 0.0)) throw ConfigError("config: field 'h' must be > 0");

  if (!j.contains("s")) throw ConfigError("config: missing field 's'");
  if (j.at("s").is_array()) {
    for (const auto& sv : j.at("s")) {
      const double s = detail::require_number(sv, "s");
      detail::check_s(s);
      cfg.s_values.push_back(s);
    }
  } else {
    const double s = detail::require_number(j.at("s"), "s");
    detail::check_s(s);
    cfg.s_values.push_back(s);
  }

  if (j.contains("beta")) {
    cfg.beta = detail::require_number(j.at("beta"), "beta");
    if (!(cfg.beta > 0.0)) throw ConfigError("config: field 'beta' must be > 0");
    cfg.has_beta = true;
  }

  if (j.contains("max_iter")) {
    const auto v = detail::require_integer(j.at("max_iter"), "max_iter");
    if (v < 1) throw ConfigError("config: field 'max_iter' must be >= 1");
    cfg.opts.max_iter = static_cast<int>(v);
  }
  if (j.contains("restarts")) {
    const auto v = detail::require_integer(j.at("restarts"), "restarts");
    if (v < 1) throw ConfigError("config: field 'restarts' must be >= 1");
    cfg.opts.restarts = static_cast<int>(v);
  }
  if (j.contains("seed")) {
    const auto v = detail::require_integer(j.at("seed"), "seed");
    if (v < 0) throw ConfigError("config: field 'seed' must be >= 0");
    cfg.opts.seed = static_cast<std::uint64_t>(v);
  }
  if (j.contains("solver_tol")) {
    cfg.opts.solver_tol = detail::require_number(j.at("solver_tol"), "solver_tol");
    if (!(cfg.opts.solver_tol > 0.0))
      throw ConfigError("config: field 'solver_tol' must be > 0");
  }
  if (j.contains("brute_limit")) {
    const auto v = detail::require_integer(j.at("brute_limit"), "brute_limit");
    if (v < 1) throw ConfigError("config: field 'brute_limit' must be >= 1");
    cfg.brute_limit = static_cast<std::uint64_t>(v);
  }
  if (j.contains("init")) {
    if (!j.at("init").is_string())
      throw ConfigError("config: field 'init' must be a string");
    const std::string mode = j.at("init").get<std::string>();
    if (mode == "random")
      cfg.opts.init = InitMode::random;
    else if (mode == "centered")
      cfg.opts.init = InitMode::centered;
    else if (mode == "uniform-then-snap")
      cfg.opts.init = InitMode::uniform_then_snap;
    else
      throw ConfigError(
          "config: field 'init' must be one of random, centered, uniform-then-snap");
  }
  if (j.contains("f")) {
    if (!j.at("f").is_string())
      throw ConfigError("config: field 'f' must be a string (\"ones\" or a CSV path)");
    cfg.f_source = j.at("f").get<std::string>();
  }
  if (j.contains("out")) {
    if (!j.at("out").is_string())
      throw ConfigError("config: field 'out' must be a string");
    cfg.out_dir = j.at("out").get<std::string>();
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(j);
}

// Grid construction with config-level error reporting.
inline Grid grid_from_config(const RunConfig& cfg) {
  try {
    return build_grid(cfg.domain, cfg.h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline MassSnap mass_from_config(const Grid& grid, const RunConfig& cfg) {
  if (!cfg.has_beta)
    throw ConfigError("config: missing field 'beta'");
  try {
    return snap_mass(grid, cfg.beta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace fraclap
