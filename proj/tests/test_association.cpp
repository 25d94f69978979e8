#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "nomamec/association.hpp"
#include "nomamec/deployment.hpp"

using namespace nomamec;

namespace {

CostTable random_table(std::size_t users, std::size_t pairs, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  std::vector<double> raw(users * pairs);
  for (auto& v : raw) v = u(rng);
  return CostTable::from_raw(users, pairs, std::move(raw));
}

Scenario small_scenario(std::uint64_t seed, std::size_t users, std::size_t bs) {
  Rng rng(seed);
  SystemParams p;
  p.t_max_s = 0.1;
  p.p_max_w = 0.1;
  std::vector<TaskProfile> tasks(users, TaskProfile{1e7, 1e3});
  std::vector<ServerProfile> servers;
  for (std::size_t m = 0; m < bs; ++m)
    servers.push_back(m % 2 ? ServerProfile{1.2e-28, 1e9} : ServerProfile{0.8e-28, 0.8e9});
  return random_scenario(rng, Deployment{}, p, tasks, servers);
}

}  // namespace

TEST(EnumeratePairs, Counts) {
  EXPECT_EQ(enumerate_pairs(2).size(), 1u);
  EXPECT_EQ(enumerate_pairs(3).size(), 3u);
  EXPECT_EQ(enumerate_pairs(6).size(), 15u);
  const auto p = enumerate_pairs(3);
  EXPECT_EQ(p[0], (BsPair{0, 1}));
  EXPECT_EQ(p[1], (BsPair{0, 2}));
  EXPECT_EQ(p[2], (BsPair{1, 2}));
  EXPECT_THROW(enumerate_pairs(1), ParameterError);
}

TEST(CostTable, PenalizesInfeasible) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto t = CostTable::from_raw(2, 2, {1.0, inf, 3.0, 2.0});
  EXPECT_FALSE(t.feasible_at(0, 1));
  EXPECT_EQ(t.penalty, 3e6);
  EXPECT_EQ(t.at(0, 1), 3e6);
  EXPECT_THROW(CostTable::from_raw(2, 2, {1.0}), ParameterError);
}

TEST(BlockingPair, DetectsImprovingSwap) {
  // u0 prefers pair 1, u1 prefers pair 0.
  const auto t = CostTable::from_raw(2, 2, {5.0, 1.0, 1.0, 5.0});
  const MatchState s = make_state({0, 1}, t);
  EXPECT_TRUE(is_blocking_pair(s, 0, 1, t));
  EXPECT_EQ(count_blocking_pairs(s, t), 1u);
  const MatchState swapped = make_state({1, 0}, t);
  EXPECT_FALSE(is_blocking_pair(swapped, 0, 1, t));
  EXPECT_THROW(is_blocking_pair(s, 0, 0, t), ParameterError);
}

TEST(SwapMatch, SingleUserNeverSwaps) {
  const auto t = random_table(1, 3, 1);
  const auto r = swap_match(t, 5);
  EXPECT_EQ(r.swaps, 0u);
  EXPECT_EQ(r.evaluations, 0u);
  EXPECT_TRUE(r.stable);
  EXPECT_TRUE(is_valid_matching(r.state, t));
}

TEST(SwapMatch, TwoUsersReachOptimum) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = random_table(2, 3, seed);
    const auto r = swap_match(t, seed);
    const auto best = exhaustive_match(t);
    EXPECT_EQ(count_blocking_pairs(r.state, t), 0u);
    EXPECT_GE(r.state.total_energy, best.total_energy);
  }
}

TEST(SwapMatch, CapacityError) {
  const auto t = random_table(4, 3, 2);
  EXPECT_THROW(swap_match(t, 1), CapacityError);
  EXPECT_THROW(exhaustive_match(t), CapacityError);
}

TEST(ExhaustiveMatch, SizeLimit) {
  const auto t = random_table(6, 45, 3);  // 45*44*43*42*41*40 > 1e7
  EXPECT_THROW(exhaustive_match(t), SizeError);
}

TEST(SwapMatch, TraceMonotoneAndStable) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto t = random_table(4, 10, seed);
    const auto r = swap_match(t, seed + 1000);
    ASSERT_TRUE(is_valid_matching(r.state, t));
    EXPECT_EQ(r.energy_trace.size(), r.swaps + 1);
    for (std::size_t k = 1; k < r.energy_trace.size(); ++k)
      EXPECT_LT(r.energy_trace[k], r.energy_trace[k - 1]);
    EXPECT_EQ(count_blocking_pairs(r.state, t), 0u);
    EXPECT_EQ(r.final_scan_evaluations, 4u * 3u / 2u);
    EXPECT_LE(exhaustive_match(t).total_energy, r.state.total_energy);
    EXPECT_EQ(r.initial_energy, r.energy_trace.front());
  }
}

TEST(SwapMatch, Deterministic) {
  const auto t = random_table(5, 15, 7);
  const auto a = swap_match(t, 99), b = swap_match(t, 99);
  EXPECT_EQ(a.state.assignment, b.state.assignment);
  EXPECT_EQ(a.state.total_energy, b.state.total_energy);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(SwapMatch, InvariantToPairRelabeling) {
  // Reversing pair order relabels the same problem; the optimum is unchanged.
  const auto t = random_table(3, 6, 11);
  std::vector<double> rev(t.energy.size());
  for (std::size_t u = 0; u < 3; ++u)
    for (std::size_t p = 0; p < 6; ++p) rev[u * 6 + (5 - p)] = t.at(u, p);
  const auto t2 = CostTable::from_raw(3, 6, rev);
  EXPECT_DOUBLE_EQ(exhaustive_match(t).total_energy, exhaustive_match(t2).total_energy);
}

TEST(Scenario, PairProblemMapsBack) {
  const Scenario sc = small_scenario(5, 2, 4);
  const auto prob = pair_problem(sc, 1, BsPair{1, 3});
  EXPECT_TRUE((prob.source[0] == 1 && prob.source[1] == 3) ||
              (prob.source[0] == 3 && prob.source[1] == 1));
  EXPECT_LE(prob.h1(), prob.h2());
  EXPECT_THROW(pair_problem(sc, 2, BsPair{0, 1}), ParameterError);
  EXPECT_THROW(pair_problem(sc, 0, BsPair{1, 1}), ParameterError);
}

TEST(Scenario, ThreeUsersSixBsStable) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario sc = small_scenario(seed, 3, 6);
    const CostTable t = build_cost_table(sc);
    EXPECT_EQ(t.pairs, 15u);
    const auto r = swap_match(t, seed);
    EXPECT_EQ(count_blocking_pairs(r.state, t), 0u);
    EXPECT_LE(exhaustive_match(t).total_energy, r.state.total_energy * (1 + 1e-12));
  }
}

TEST(Scenario, ThreadedTableMatchesSerial) {
  const Scenario sc = small_scenario(8, 3, 5);
  const CostTable a = build_cost_table(sc, 1), b = build_cost_table(sc, 4);
  EXPECT_EQ(a.energy, b.energy);
}

TEST(Deployment, MinimumDistance) {
  Rng rng(2);
  Deployment dep;
  const Placement pl = place(rng, dep, 20, 4);
  for (const auto& row : pl.distances)
    for (double d : row) {
      EXPECT_GE(d, dep.min_distance_m);
      EXPECT_LE(d, 2.0 * dep.cell_radius_m);
    }
  Deployment tight;
  tight.cell_radius_m = 50.0;
  tight.min_distance_m = 99.0;
  tight.max_rejections = 100;
  EXPECT_THROW(place(rng, tight, 1, 3), ParameterError);
}
