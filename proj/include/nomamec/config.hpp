#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nomamec/error.hpp"
#include "nomamec/experiments.hpp"
#include "nomamec/params.hpp"
#include "nomamec/verify.hpp"

namespace nomamec {

// JSON configuration. Sections: params, task, servers, deployment, instance,
// sweep, matching, verify. Every key carries its unit; unknown keys are
// rejected so typos surface as errors instead of silent defaults.

struct SweepSection {
  SweepVariable variable = SweepVariable::p_max;
  std::vector<double> values;
  std::size_t draws = 500;
  std::size_t outage_trials = 0;
};

struct MatchingSection {
  std::size_t users = 3;
  std::size_t base_stations = 3;
  std::size_t draws = 200;
  bool exhaustive = true;
};

struct Config {
  SystemParams params;
  TaskProfile task;
  std::vector<ServerProfile> servers{{0.8e-28, 0.8e9}, {1.2e-28, 1e9}};
  Deployment deployment;
  std::optional<std::array<LinkEstimate, 2>> links;
  std::optional<SweepSection> sweep;
  std::optional<MatchingSection> matching;
  nlohmann::json verify = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
};

namespace config_detail {

using nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

inline void allow_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(join(path, it.key()), "unknown key");
  }
}

inline void read_number(const json& j, const std::string& path, const char* key, double& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  out = v.get<double>();
}

inline void read_count(const json& j, const std::string& path, const char* key,
                       std::size_t& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) throw ConfigError(join(path, key), "expected a nonnegative integer");
  out = v.get<std::size_t>();
}

inline void read_bool(const json& j, const std::string& path, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  out = v.get<bool>();
}

/// Runs a validate() and rethrows its message against `path`.
template <typename T>
void check(const T& obj, const std::string& path) {
  try {
    obj.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
}

inline ServerProfile parse_server(const json& j, const std::string& path) {
  require_object(j, path);
  allow_keys(j, path, {"kappa", "cpu_hz"});
  ServerProfile s;
  read_number(j, path, "kappa", s.kappa);
  read_number(j, path, "cpu_hz", s.cpu_hz);
  check(s, path);
  return s;
}

inline LinkEstimate parse_link(const json& j, const std::string& path) {
  require_object(j, path);
  allow_keys(j, path, {"distance_m", "est_gain", "err_var"});
  for (const char* k : {"distance_m", "est_gain", "err_var"})
    if (!j.contains(k)) throw ConfigError(join(path, k), "missing");
  LinkEstimate l;
  read_number(j, path, "distance_m", l.distance_m);
  read_number(j, path, "est_gain", l.est_gain);
  read_number(j, path, "err_var", l.err_var);
  try {
    validate_link(l);
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
  return l;
}

}  // namespace config_detail

inline Config parse_config(const nlohmann::json& root) {
  using namespace config_detail;
  require_object(root, "");
  allow_keys(root, "", {"params", "task", "servers", "deployment", "instance", "sweep",
                        "matching", "verify", "seed"});
  Config cfg;

  if (root.contains("params")) {
    const json& j = root.at("params");
    require_object(j, "params");
    allow_keys(j, "params", {"bandwidth_hz", "noise_psd_dbm_hz", "path_loss_exp", "outage_eps",
                             "t_max_s", "p_max_w"});
    read_number(j, "params", "bandwidth_hz", cfg.params.bandwidth_hz);
    read_number(j, "params", "noise_psd_dbm_hz", cfg.params.noise_psd_dbm_hz);
    read_number(j, "params", "path_loss_exp", cfg.params.path_loss_exp);
    read_number(j, "params", "outage_eps", cfg.params.outage_eps);
    read_number(j, "params", "t_max_s", cfg.params.t_max_s);
    read_number(j, "params", "p_max_w", cfg.params.p_max_w);
  }
  check(cfg.params, "params");

  if (root.contains("task")) {
    const json& j = root.at("task");
    require_object(j, "task");
    allow_keys(j, "task", {"bits", "cycles_per_bit"});
    read_number(j, "task", "bits", cfg.task.bits);
    read_number(j, "task", "cycles_per_bit", cfg.task.cycles_per_bit);
  }
  check(cfg.task, "task");

  if (root.contains("servers")) {
    const json& j = root.at("servers");
    if (!j.is_array() || j.empty()) throw ConfigError("servers", "expected a nonempty array");
    cfg.servers.clear();
    for (std::size_t i = 0; i < j.size(); ++i)
      cfg.servers.push_back(parse_server(j[i], index("servers", i)));
  }

  if (root.contains("deployment")) {
    const json& j = root.at("deployment");
    require_object(j, "deployment");
    allow_keys(j, "deployment", {"cell_radius_m", "min_distance_m", "max_rejections", "err_var"});
    read_number(j, "deployment", "cell_radius_m", cfg.deployment.cell_radius_m);
    read_number(j, "deployment", "min_distance_m", cfg.deployment.min_distance_m);
    read_count(j, "deployment", "max_rejections", cfg.deployment.max_rejections);
    read_number(j, "deployment", "err_var", cfg.deployment.err_var);
  }
  check(cfg.deployment, "deployment");

  if (root.contains("instance")) {
    const json& j = root.at("instance");
    require_object(j, "instance");
    allow_keys(j, "instance", {"links"});
    if (!j.contains("links")) throw ConfigError("instance.links", "missing");
    const json& links = j.at("links");
    if (!links.is_array() || links.size() != 2)
      throw ConfigError("instance.links", "expected exactly two links");
    cfg.links = std::array<LinkEstimate, 2>{parse_link(links[0], "instance.links[0]"),
                                            parse_link(links[1], "instance.links[1]")};
    if ((*cfg.links)[0].perfect_csi() != (*cfg.links)[1].perfect_csi())
      throw ConfigError("instance.links", "both links must share the same CSI mode");
  }

  if (root.contains("sweep")) {
    const json& j = root.at("sweep");
    require_object(j, "sweep");
    allow_keys(j, "sweep", {"variable", "values", "draws", "outage_trials"});
    SweepSection s;
    if (!j.contains("variable")) throw ConfigError("sweep.variable", "missing");
    if (!j.at("variable").is_string()) throw ConfigError("sweep.variable", "expected a string");
    const auto var = parse_sweep_variable(j.at("variable").get<std::string>());
    if (!var)
      throw ConfigError("sweep.variable",
                        "expected one of t_max, p_max, f2, err_var, outage_eps, cell_radius");
    s.variable = *var;
    if (!j.contains("values")) throw ConfigError("sweep.values", "missing");
    const json& vals = j.at("values");
    if (!vals.is_array() || vals.empty())
      throw ConfigError("sweep.values", "expected a nonempty array");
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (!vals[i].is_number()) throw ConfigError(index("sweep.values", i), "expected a number");
      const double v = vals[i].get<double>();
      if (i > 0 && !(v > s.values.back()))
        throw ConfigError(index("sweep.values", i), "values must be strictly increasing");
      s.values.push_back(v);
    }
    read_count(j, "sweep", "draws", s.draws);
    if (s.draws == 0) throw ConfigError("sweep.draws", "must be at least 1");
    read_count(j, "sweep", "outage_trials", s.outage_trials);
    if (s.outage_trials != 0 && s.outage_trials < 10000)
      throw ConfigError("sweep.outage_trials", "must be 0 or at least 10000");
    cfg.sweep = s;
  }

  if (root.contains("matching")) {
    const json& j = root.at("matching");
    require_object(j, "matching");
    allow_keys(j, "matching", {"users", "base_stations", "draws", "exhaustive"});
    MatchingSection m;
    read_count(j, "matching", "users", m.users);
    read_count(j, "matching", "base_stations", m.base_stations);
    read_count(j, "matching", "draws", m.draws);
    read_bool(j, "matching", "exhaustive", m.exhaustive);
    if (m.users == 0) throw ConfigError("matching.users", "must be at least 1");
    if (m.base_stations < 2) throw ConfigError("matching.base_stations", "must be at least 2");
    if (m.draws == 0) throw ConfigError("matching.draws", "must be at least 1");
    cfg.matching = m;
  }

  if (root.contains("verify")) {
    require_object(root.at("verify"), "verify");
    cfg.verify = root.at("verify");
  }

  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = root.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

inline Config parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", e.what());
  }
  return parse_config(j);
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline SweepSpec to_sweep_spec(const Config& cfg) {
  if (!cfg.sweep) throw ConfigError("sweep", "missing");
  if (cfg.servers.size() != 2) throw ConfigError("servers", "a sweep needs exactly two servers");
  SweepSpec s;
  s.variable = cfg.sweep->variable;
  s.values = cfg.sweep->values;
  s.draws = cfg.sweep->draws;
  s.outage_trials = cfg.sweep->outage_trials;
  s.params = cfg.params;
  s.task = cfg.task;
  s.servers = {cfg.servers[0], cfg.servers[1]};
  s.deployment = cfg.deployment;
  if (cfg.seed) s.seed = *cfg.seed;
  try {
    s.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("sweep", e.what());
  }
  return s;
}

inline MatchingSpec to_matching_spec(const Config& cfg) {
  const MatchingSection m = cfg.matching.value_or(MatchingSection{});
  MatchingSpec s;
  s.users = m.users;
  s.base_stations = m.base_stations;
  s.draws = m.draws;
  s.exhaustive = m.exhaustive;
  s.params = cfg.params;
  s.task = cfg.task;
  s.servers = cfg.servers;
  s.deployment = cfg.deployment;
  if (cfg.seed) s.seed = *cfg.seed;
  return s;
}

/// Verify options from the "verify" section; `quick` picks the smoke-run
/// counts before applying overrides.
inline VerifyOptions to_verify_options(const Config& cfg, bool quick) {
  using namespace config_detail;
  VerifyOptions o = quick ? VerifyOptions::quick() : VerifyOptions{};
  const json& j = cfg.verify;
  allow_keys(j, "verify",
             {"bulk_instances", "deep_instances", "identity_pairs", "curvature_instances",
              "convexity_triples", "monotonicity_instances", "monotonicity_points",
              "outage_instances", "outage_trials", "case_instances", "ece_instances",
              "gain_points", "constraint_instances", "scaling_instances", "matching_instances",
              "bulk_step", "deep_step", "energy_rel_tol", "identity_rel_tol",
              "curvature_rel_tol", "outage_band", "outage_pass_fraction",
              "matching_optimal_fraction"});
  read_count(j, "verify", "bulk_instances", o.bulk_instances);
  read_count(j, "verify", "deep_instances", o.deep_instances);
  read_count(j, "verify", "identity_pairs", o.identity_pairs);
  read_count(j, "verify", "curvature_instances", o.curvature_instances);
  read_count(j, "verify", "convexity_triples", o.convexity_triples);
  read_count(j, "verify", "monotonicity_instances", o.monotonicity_instances);
  read_count(j, "verify", "monotonicity_points", o.monotonicity_points);
  read_count(j, "verify", "outage_instances", o.outage_instances);
  read_count(j, "verify", "outage_trials", o.outage_trials);
  read_count(j, "verify", "case_instances", o.case_instances);
  read_count(j, "verify", "ece_instances", o.ece_instances);
  read_count(j, "verify", "gain_points", o.gain_points);
  read_count(j, "verify", "constraint_instances", o.constraint_instances);
  read_count(j, "verify", "scaling_instances", o.scaling_instances);
  read_count(j, "verify", "matching_instances", o.matching_instances);
  read_number(j, "verify", "bulk_step", o.bulk_step);
  read_number(j, "verify", "deep_step", o.deep_step);
  read_number(j, "verify", "energy_rel_tol", o.energy_rel_tol);
  read_number(j, "verify", "identity_rel_tol", o.identity_rel_tol);
  read_number(j, "verify", "curvature_rel_tol", o.curvature_rel_tol);
  read_number(j, "verify", "outage_band", o.outage_band);
  read_number(j, "verify", "outage_pass_fraction", o.outage_pass_fraction);
  read_number(j, "verify", "matching_optimal_fraction", o.matching_optimal_fraction);
  if (!(o.bulk_step > 0.0 && o.bulk_step <= 0.01))
    throw ConfigError("verify.bulk_step", "must lie in (0, 0.01]");
  if (!(o.deep_step > 0.0 && o.deep_step <= 0.01))
    throw ConfigError("verify.deep_step", "must lie in (0, 0.01]");
  if (o.outage_trials < 100000) throw ConfigError("verify.outage_trials", "must be at least 1e5");
  if (o.monotonicity_points < 100)
    throw ConfigError("verify.monotonicity_points", "must be at least 100");
  o.ranges.base = cfg.params;
  if (cfg.seed) o.seed = *cfg.seed;
  return o;
}

}  // namespace nomamec
