#include <cmath>

#include <gtest/gtest.h>

#include "nomamec/oracle.hpp"
#include "nomamec/verify.hpp"

using namespace nomamec;

TEST(Digest, StableAndSensitive) {
  const auto a = random_instance(1, InstanceRanges{});
  const auto b = random_instance(1, InstanceRanges{});
  EXPECT_EQ(digest(a), digest(b));
  EXPECT_EQ(digest(a).size(), 16u);
  auto c = a;
  c.params.p_max_w *= 1.0 + 1e-15;
  EXPECT_NE(digest(a), digest(c));
}

TEST(RandomInstance, FeasibleAndDeterministic) {
  InstanceRanges r;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto prob = random_instance(s, r);
    EXPECT_TRUE(feasibility(prob).feasible);
    EXPECT_LE(prob.h1(), prob.h2());
  }
  r.p_max_min_w = 1e-12;
  r.p_max_max_w = 2e-12;
  r.max_attempts = 10;
  EXPECT_THROW(random_instance(3, r), ParameterError);
}

TEST(RawObjective, ZeroRateIsInfinite) {
  const auto prob = random_instance(5, InstanceRanges{});
  EXPECT_TRUE(std::isinf(raw_objective(0.5, 0.0, 0.01, prob)));
  EXPECT_TRUE(std::isfinite(raw_objective(0.0, 0.0, 0.01, prob)));
}

TEST(GridOracle, FindsKnownMinimum) {
  const auto prob = random_instance(9, InstanceRanges{});
  const auto g = grid_beta_oracle(prob, 1e-3);
  ASSERT_TRUE(g.feasible);
  EXPECT_TRUE(g.identity_ok);
  EXPECT_GT(g.identity_checks, 0u);
  const auto sol = solve(prob);
  EXPECT_NEAR(g.beta1, sol.beta1, 2e-3);
  EXPECT_THROW(grid_beta_oracle(prob, 0.5), ParameterError);
}

TEST(PowerMonotonicity, NoNegativePartials) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto rep = power_monotonicity_probe(random_instance(s, InstanceRanges{}), 100, s);
    EXPECT_TRUE(rep.pass) << rep.oracle_value;
    EXPECT_EQ(rep.samples, 200u);
  }
}

TEST(OutageValidation, RowsPerLoadedLink) {
  InstanceRanges r;
  r.err_var_min = 1.0;
  r.err_var_max = 5.0;
  const auto prob = random_instance(14, r);
  const auto sol = solve(prob);
  const auto rows = outage_validation(prob, sol, 3);
  const std::size_t loaded = (sol.beta1 > 0.0) + (sol.beta1 < 1.0);
  EXPECT_EQ(rows.size(), loaded);
  for (const auto& row : rows) {
    EXPECT_EQ(row.samples, 100000u);
    if (row.hard) EXPECT_TRUE(row.pass) << row.oracle_value;
  }
}

TEST(Verify, QuickBatteryPasses) {
  VerifyOptions o = VerifyOptions::quick();
  const VerifySummary s = run_verify(o);
  for (const auto& r : s.reports) EXPECT_TRUE(!r.hard || r.pass) << r.check;
  EXPECT_TRUE(s.ok());
  EXPECT_GT(s.passed, 10u);
}

TEST(Verify, DeterministicReports) {
  VerifyOptions o = VerifyOptions::quick();
  const auto a = run_verify(o), b = run_verify(o);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(a.reports[i].check, b.reports[i].check);
    EXPECT_EQ(a.reports[i].digest, b.reports[i].digest);
    EXPECT_EQ(a.reports[i].failures, b.reports[i].failures);
  }
}

TEST(Verify, SignFlipFaultIsCaught) {
  VerifyOptions o = VerifyOptions::quick();
  o.fault = GainFault::sign_flip;
  EXPECT_FALSE(run_verify(o).ok());
}

TEST(Verify, UnscaledGainFaultIsCaught) {
  VerifyOptions o = VerifyOptions::quick();
  o.fault = GainFault::unscaled;
  const auto s = run_verify(o);
  EXPECT_FALSE(s.ok());
  bool outage_failed = false;
  for (const auto& r : s.reports)
    if (r.check == "outage_calibration") outage_failed = !r.pass;
  EXPECT_TRUE(outage_failed);
}

TEST(Verify, FaultNamesRoundTrip) {
  for (auto f : {GainFault::none, GainFault::sign_flip, GainFault::unscaled})
    EXPECT_EQ(parse_gain_fault(to_string(f)), f);
  EXPECT_FALSE(parse_gain_fault("bogus").has_value());
}
