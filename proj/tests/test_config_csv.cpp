#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "nomamec/config.hpp"
#include "nomamec/csv.hpp"

using namespace nomamec;

namespace {

std::string error_path(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

TEST(Config, Defaults) {
  const Config c = parse_config_text("{}");
  EXPECT_EQ(c.params.bandwidth_hz, 1e9);
  EXPECT_EQ(c.servers.size(), 2u);
  EXPECT_FALSE(c.sweep.has_value());
  EXPECT_FALSE(c.seed.has_value());
}

TEST(Config, FullSweep) {
  const Config c = parse_config_text(R"({
    "params": {"t_max_s": 0.005, "p_max_w": 0.05},
    "task": {"bits": 1e6},
    "servers": [{"kappa": 1e-28, "cpu_hz": 1e9}, {"kappa": 2e-28, "cpu_hz": 0.5e9}],
    "deployment": {"cell_radius_m": 300, "err_var": 0.2},
    "sweep": {"variable": "f2", "values": [0.5e9, 1e9], "draws": 10},
    "seed": 42
  })");
  const SweepSpec s = to_sweep_spec(c);
  EXPECT_EQ(s.variable, SweepVariable::f2);
  EXPECT_EQ(s.values.size(), 2u);
  EXPECT_EQ(s.draws, 10u);
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.params.t_max_s, 0.005);
  EXPECT_EQ(s.task.bits, 1e6);
  EXPECT_EQ(s.servers[1].cpu_hz, 0.5e9);
  EXPECT_EQ(s.deployment.cell_radius_m, 300.0);
}

TEST(Config, Instance) {
  const Config c = parse_config_text(R"({"instance": {"links": [
    {"distance_m": 100, "est_gain": 0.5, "err_var": 0.1},
    {"distance_m": 200, "est_gain": 1.5, "err_var": 0.1}]}})");
  ASSERT_TRUE(c.links.has_value());
  EXPECT_EQ((*c.links)[1].distance_m, 200.0);
}

TEST(Config, ErrorPaths) {
  EXPECT_EQ(error_path(R"({"params": {"t_max_s": -1}})"), "params");
  EXPECT_EQ(error_path(R"({"params": {"tmax": 1}})"), "params.tmax");
  EXPECT_EQ(error_path(R"({"bogus": 1})"), "bogus");
  EXPECT_EQ(error_path(R"({"servers": [{"kappa": 1e-28}, {"cpu_hz": "fast"}]})"),
            "servers[1].cpu_hz");
  EXPECT_EQ(error_path(R"({"sweep": {"variable": "p_max", "values": [0.1, 0.2, 0.15]}})"),
            "sweep.values[2]");
  EXPECT_EQ(error_path(R"({"sweep": {"variable": "nope", "values": [1]}})"), "sweep.variable");
  EXPECT_EQ(error_path(R"({"instance": {"links": [{"distance_m": 1, "est_gain": 1}]}})"),
            "instance.links");
  EXPECT_EQ(error_path(R"({"instance": {"links": [{"distance_m": 1, "est_gain": 1},
                           {"distance_m": 1, "est_gain": 1, "err_var": 0}]}})"),
            "instance.links[0].err_var");
  EXPECT_EQ(error_path(R"({"seed": -3})"), "seed");
  EXPECT_EQ(error_path("{not json"), "<root>");
  EXPECT_EQ(error_path(R"({"matching": {"base_stations": 1}})"), "matching.base_stations");
}

TEST(Config, SweepNeedsTwoServers) {
  const Config c = parse_config_text(R"({
    "servers": [{"kappa": 1e-28, "cpu_hz": 1e9}],
    "sweep": {"variable": "p_max", "values": [0.1]}})");
  EXPECT_THROW(to_sweep_spec(c), ConfigError);
}

TEST(Config, VerifyOverrides) {
  const Config c = parse_config_text(R"({"verify": {"bulk_instances": 7, "outage_band": 0.03}})");
  const VerifyOptions o = to_verify_options(c, true);
  EXPECT_EQ(o.bulk_instances, 7u);
  EXPECT_EQ(o.outage_band, 0.03);
  EXPECT_EQ(o.deep_instances, VerifyOptions::quick().deep_instances);
  EXPECT_THROW(to_verify_options(parse_config_text(R"({"verify": {"x": 1}})"), false),
               ConfigError);
}

TEST(Csv, SweepRoundTrip) {
  SweepSpec s;
  s.variable = SweepVariable::t_max;
  s.values = {0.002, 0.01};
  s.draws = 30;
  s.task.bits = 3.2e6;
  const auto recs = run_baselines(s);
  std::stringstream ss;
  csv::write_sweep(ss, recs);
  const auto back = csv::read_sweep(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].scheme, recs[i].scheme);
    EXPECT_EQ(back[i].value, recs[i].value);
    EXPECT_EQ(back[i].feasible_draws, recs[i].feasible_draws);
    EXPECT_TRUE(same(back[i].mean_energy_j, recs[i].mean_energy_j));
    EXPECT_TRUE(same(back[i].mean_beta1_common, recs[i].mean_beta1_common));
    EXPECT_TRUE(same(back[i].mean_outage, recs[i].mean_outage));
    EXPECT_EQ(back[i].case_counts, recs[i].case_counts);
  }
}

TEST(Csv, MatchRoundTrip) {
  MatchingSpec m;
  m.draws = 4;
  const auto recs = run_matching_experiment(m);
  std::stringstream ss;
  csv::write_match(ss, recs);
  const auto back = csv::read_match(ss);
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(back[i].swap_energy_j, recs[i].swap_energy_j);
    EXPECT_EQ(back[i].exhaustive_energy_j, recs[i].exhaustive_energy_j);
    EXPECT_EQ(back[i].stable, recs[i].stable);
    EXPECT_EQ(back[i].swap_ms, recs[i].swap_ms);
  }
}

TEST(Csv, VerifyRoundTrip) {
  OracleReport r;
  r.check = "curvature";
  r.digest = "00ff";
  r.seed = 1ull << 40;
  r.oracle_value = 1.0 / 3.0;
  r.rel_gap = 1e-17;
  r.samples = 10;
  std::stringstream ss;
  csv::write_verify(ss, {r});
  const auto back = csv::read_verify(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].check, "curvature");
  EXPECT_EQ(back[0].seed, r.seed);
  EXPECT_EQ(back[0].oracle_value, r.oracle_value);
  EXPECT_EQ(back[0].rel_gap, r.rel_gap);
}

TEST(Csv, RejectsWrongSchema) {
  std::stringstream a("# nomamec-match v1\n");
  EXPECT_THROW(csv::read_sweep(a), ParameterError);
  std::stringstream b(std::string("# nomamec-sweep v1\n") + std::string(csv::sweep_header) +
                      "\noptimal,p_max,1\n");
  EXPECT_THROW(csv::read_sweep(b), ParameterError);
}
