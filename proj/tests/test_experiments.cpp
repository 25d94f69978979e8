#include <cmath>

#include <gtest/gtest.h>

#include "nomamec/experiments.hpp"

using namespace nomamec;

namespace {

SweepSpec small_sweep(SweepVariable var, std::vector<double> values) {
  SweepSpec s;
  s.variable = var;
  s.values = std::move(values);
  s.draws = 200;
  s.seed = 5;
  s.task.bits = 3.2e6;
  return s;
}

}  // namespace

TEST(SweepVariable, NamesRoundTrip) {
  for (auto v : {SweepVariable::t_max, SweepVariable::p_max, SweepVariable::f2,
                 SweepVariable::err_var, SweepVariable::outage_eps, SweepVariable::cell_radius})
    EXPECT_EQ(parse_sweep_variable(to_string(v)), v);
  for (auto s : {Scheme::optimal, Scheme::priority_bs1, Scheme::priority_bs2})
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  EXPECT_FALSE(parse_sweep_variable("bandwidth").has_value());
}

TEST(SweepPoint, SetsOnlyTheSweptField) {
  SweepSpec s = small_sweep(SweepVariable::f2, {0.7e9});
  const SweepPoint pt = sweep_point(s, 0.7e9);
  EXPECT_EQ(pt.servers[1].cpu_hz, 0.7e9);
  EXPECT_EQ(pt.servers[0].cpu_hz, s.servers[0].cpu_hz);
  EXPECT_EQ(pt.params.p_max_w, s.params.p_max_w);
  s.variable = SweepVariable::cell_radius;
  EXPECT_EQ(sweep_point(s, 250.0).deployment.cell_radius_m, 250.0);
}

TEST(DrawProblem, CommonRandomNumbersAcrossValues) {
  SweepSpec s = small_sweep(SweepVariable::p_max, {0.01, 0.1});
  const auto a = draw_two_bs_problem(sweep_point(s, 0.01), 77);
  const auto b = draw_two_bs_problem(sweep_point(s, 0.1), 77);
  EXPECT_EQ(a.h1(), b.h1());
  EXPECT_EQ(a.h2(), b.h2());
  EXPECT_EQ(a.servers[0].cpu_hz, s.servers[0].cpu_hz);
}

TEST(PriorityBaseline, OmaWhenSingleLinkFits) {
  SweepSpec s = small_sweep(SweepVariable::p_max, {1.0});
  s.params.p_max_w = 1.0;
  const auto prob = draw_two_bs_problem(sweep_point(s, 1.0), 3);
  ASSERT_TRUE(feasibility(prob).feasible);
  const auto b2 = priority_baseline(prob, 1);
  ASSERT_TRUE(b2.feasible);
  EXPECT_FALSE(b2.spilled);
  EXPECT_EQ(b2.beta1, 0.0);
  EXPECT_DOUBLE_EQ(b2.energy_j, energy_of_split(0.0, prob));
  EXPECT_THROW(priority_baseline(prob, 2), ParameterError);
}

TEST(PriorityBaseline, IdenticalServersFavourStrongerLink) {
  SweepSpec s = small_sweep(SweepVariable::p_max, {0.01, 0.1});
  s.servers = {ServerProfile{1e-28, 1e9}, ServerProfile{1e-28, 1e9}};
  const SweepTable t = evaluate_sweep(s, true);
  for (const auto& row : t.outcomes)
    for (const auto& o : row)
      if (o.baselines[0].feasible && o.baselines[1].feasible)
        EXPECT_LE(o.baselines[1].energy_j, o.baselines[0].energy_j * (1 + 1e-12));
}

TEST(Sweep, DominatesBaselines) {
  const SweepTable t = evaluate_sweep(small_sweep(SweepVariable::p_max, {0.005, 0.02, 0.1}), true);
  EXPECT_GT(t.dominance_checked, 0u);
  EXPECT_EQ(t.dominance_violations, 0u);
}

TEST(Sweep, DeterministicAcrossThreads) {
  SweepSpec s = small_sweep(SweepVariable::t_max, {0.002, 0.01});
  const auto a = run_sweep(s);
  s.threads = 4;
  const auto b = run_sweep(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].feasible_draws, b[i].feasible_draws);
    EXPECT_EQ(a[i].mean_energy_j, b[i].mean_energy_j);
    EXPECT_EQ(a[i].case_counts, b[i].case_counts);
  }
}

TEST(Sweep, CommonSupportAndCounts) {
  const auto recs = run_sweep(small_sweep(SweepVariable::p_max, {0.002, 0.01, 0.1}));
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& r : recs) {
    std::size_t total = 0;
    for (auto c : r.case_counts) total += c;
    EXPECT_EQ(total, r.draws);
    EXPECT_EQ(r.draws - r.case_counts[5], r.feasible_draws);
    EXPECT_EQ(r.common_draws, recs.front().common_draws);
    EXPECT_LE(r.common_draws, r.feasible_draws);
  }
  // More power never makes a draw infeasible.
  EXPECT_LE(recs[0].feasible_draws, recs[2].feasible_draws);
  EXPECT_EQ(recs[0].common_draws, recs[0].feasible_draws);
}

TEST(Sweep, BaselineRecordsFollowOptimal) {
  const auto recs = run_baselines(small_sweep(SweepVariable::p_max, {0.01, 0.1}));
  ASSERT_EQ(recs.size(), 6u);
  EXPECT_EQ(recs[0].scheme, Scheme::optimal);
  EXPECT_EQ(recs[2].scheme, Scheme::priority_bs1);
  EXPECT_EQ(recs[4].scheme, Scheme::priority_bs2);
}

TEST(Sweep, OutageColumn) {
  SweepSpec s = small_sweep(SweepVariable::p_max, {0.1});
  s.draws = 5;
  s.outage_trials = 10000;
  const auto recs = run_sweep(s);
  EXPECT_TRUE(std::isfinite(recs[0].mean_outage));
  EXPECT_GT(recs[0].mean_outage, 0.0);
  EXPECT_LT(recs[0].mean_outage, 0.5);
}

TEST(Sweep, RejectsBadSpec) {
  SweepSpec s = small_sweep(SweepVariable::p_max, {0.1, 0.05});
  EXPECT_THROW(run_sweep(s), ParameterError);
  s.values = {};
  EXPECT_THROW(run_sweep(s), ParameterError);
}

TEST(Matching, StableAndDeterministic) {
  MatchingSpec m;
  m.draws = 20;
  m.seed = 3;
  const auto a = run_matching_experiment(m);
  m.threads = 3;
  const auto b = run_matching_experiment(m);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].stable);
    EXPECT_LE(a[i].exhaustive_energy_j, a[i].swap_energy_j * (1 + 1e-12));
    EXPECT_EQ(a[i].swap_energy_j, b[i].swap_energy_j);
    EXPECT_EQ(a[i].swaps, b[i].swaps);
  }
}

TEST(Matching, ThreeUsersSixBs) {
  MatchingSpec m;
  m.users = 3;
  m.base_stations = 6;
  m.draws = 10;
  for (const auto& r : run_matching_experiment(m)) {
    EXPECT_TRUE(r.stable);
    EXPECT_EQ(r.final_scan_evaluations, 3u);
  }
}

TEST(Matching, CapacityError) {
  MatchingSpec m;
  m.users = 4;
  m.base_stations = 3;
  EXPECT_THROW(run_matching_experiment(m), CapacityError);
}

TEST(Matching, SkipExhaustive) {
  MatchingSpec m;
  m.draws = 3;
  m.exhaustive = false;
  for (const auto& r : run_matching_experiment(m)) {
    EXPECT_TRUE(std::isnan(r.exhaustive_energy_j));
    EXPECT_FALSE(r.optimal);
  }
}
