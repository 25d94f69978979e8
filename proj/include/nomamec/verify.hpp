#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nomamec/association.hpp"
#include "nomamec/channel.hpp"
#include "nomamec/experiments.hpp"
#include "nomamec/oracle.hpp"
#include "nomamec/rng.hpp"
#include "nomamec/two_bs.hpp"

namespace nomamec {

// The oracle battery behind `verify`. Each check samples its own instances
// from a seed derived from the root seed and folds its per-instance results
// into one OracleReport row.

/// Deliberate corruptions of the effective-gain formula, used to show the
/// battery catches them.
enum class GainFault { none, sign_flip, unscaled };

inline std::string_view to_string(GainFault f) {
  switch (f) {
    case GainFault::none: return "none";
    case GainFault::sign_flip: return "gain-sign-flip";
    case GainFault::unscaled: return "gain-unscaled";
  }
  return "unknown";
}

inline std::optional<GainFault> parse_gain_fault(std::string_view s) {
  for (auto f : {GainFault::none, GainFault::sign_flip, GainFault::unscaled})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

inline GainModel gain_model_for(GainFault fault) {
  switch (fault) {
    case GainFault::none: break;
    case GainFault::sign_flip:
      return [](const LinkEstimate& l, const SystemParams& p) { return -effective_gain(l, p); };
    case GainFault::unscaled:
      // Factor 2 in place of the error variance.
      return [](const LinkEstimate& l, const SystemParams& p) {
        if (l.perfect_csi()) return effective_gain(l, p);
        const double scale = p.noise_power() * path_loss(l.distance_m, p);
        return -std::log1p(-p.outage_eps) * 2.0 * (1.0 + lambda_half(l)) / scale;
      };
  }
  return default_gain_model();
}

struct VerifyOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  InstanceRanges ranges;
  GainFault fault = GainFault::none;

  std::size_t bulk_instances = 100000;
  double bulk_step = 1e-4;
  std::size_t deep_instances = 1000;
  double deep_step = 1e-6;
  double deep_beta_tol = 1e-4;
  double energy_rel_tol = 1e-8;

  std::size_t identity_pairs = 10000;
  double identity_rel_tol = 1e-9;
  std::size_t curvature_instances = 1000;
  double curvature_rel_tol = 1e-4;
  std::size_t convexity_triples = 10000;
  double convexity_abs_tol = 1e-9;
  std::size_t monotonicity_instances = 100;
  std::size_t monotonicity_points = 100;  // per instance
  double monotonicity_floor = -1e-12;

  std::size_t outage_instances = 200;
  std::size_t outage_trials = 100000;
  double outage_band = 0.02;
  double outage_pass_fraction = 0.95;
  /// Outage instances draw their error variance from this range so that a
  /// useful share of links sits inside the approximation regime.
  double outage_err_var_min = 0.5;
  double outage_err_var_max = 5.0;

  std::size_t case_instances = 100000;
  double case_beta_tol = 1e-9;
  std::size_t ece_instances = 10000;
  std::size_t gain_points = 1000;
  std::size_t constraint_instances = 10000;
  double time_rel_tol = 1e-9;
  double power_abs_tol = 1e-12;
  std::size_t scaling_instances = 1000;
  double scaling_rel_tol = 1e-9;

  std::size_t matching_instances = 200;
  double matching_optimal_fraction = 0.95;

  /// Small counts for smoke runs.
  static VerifyOptions quick() {
    VerifyOptions o;
    o.bulk_instances = 2000;
    o.deep_instances = 10;
    o.identity_pairs = 2000;
    o.curvature_instances = 200;
    o.convexity_triples = 2000;
    o.monotonicity_instances = 20;
    o.outage_instances = 40;
    o.outage_trials = 100000;
    o.case_instances = 5000;
    o.ece_instances = 2000;
    o.gain_points = 200;
    o.constraint_instances = 2000;
    o.scaling_instances = 200;
    o.matching_instances = 200;
    return o;
  }
};

struct VerifySummary {
  std::vector<OracleReport> reports;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t informational = 0;

  bool ok() const { return failed == 0; }
};

namespace detail {

/// Running aggregate of per-instance gaps for one check.
struct CheckAccumulator {
  OracleReport rep;
  std::mutex mu;

  CheckAccumulator(std::string name, std::uint64_t seed, double tol) {
    rep.check = std::move(name);
    rep.seed = seed;
    rep.tolerance = tol;
  }

  /// Records one sample. The worst gap keeps its instance digest and values;
  /// ties keep the lowest sample index so threaded runs stay reproducible.
  void add(bool pass, double gap, double oracle, double closed, const std::string& dig,
           std::size_t index) {
    std::lock_guard lock(mu);
    ++rep.samples;
    if (!pass) ++rep.failures;
    const double g = std::isnan(gap) ? std::numeric_limits<double>::infinity() : gap;
    if (rep.samples == 1 || g > rep.rel_gap || (g == rep.rel_gap && index < worst_index)) {
      rep.rel_gap = g;
      rep.oracle_value = oracle;
      rep.closed_form_value = closed;
      rep.abs_gap = std::abs(oracle - closed);
      rep.digest = dig;
      worst_index = index;
    }
  }

  std::size_t worst_index = std::numeric_limits<std::size_t>::max();
};

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

template <typename Body>
OracleReport run_check(const std::string& name, std::uint64_t seed, double tol, std::size_t n,
                       unsigned threads, Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckAccumulator acc(name, seed, tol);
  try {
    parallel_for(n, threads, [&](std::size_t i) { body(i, acc); });
    acc.rep.pass = acc.rep.failures == 0 && acc.rep.samples > 0;
  } catch (const std::exception& e) {
    acc.rep.pass = false;
    acc.rep.failures = std::max<std::size_t>(acc.rep.failures, 1);
    acc.rep.digest = std::string("exception: ") + e.what();
  }
  acc.rep.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return std::move(acc.rep);
}

}  // namespace detail

/// Runs every check and returns one report row per check.
inline VerifySummary run_verify(const VerifyOptions& opt) {
  const GainModel gain = gain_model_for(opt.fault);
  const InstanceRanges& ranges = opt.ranges;
  std::vector<OracleReport> reps;
  std::uint64_t check_no = 0;
  auto next_seed = [&] { return split_seed(opt.seed, (++check_no) << 32); };
  auto instance = [&](std::uint64_t s, std::size_t i, const InstanceRanges& r) {
    return random_instance(split_seed(s, i), r, gain);
  };

  // Closed form against the grid oracle, bulk set.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "grid_oracle_bulk", s, opt.energy_rel_tol, opt.bulk_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          const TwoBsProblem prob = instance(s, i, ranges);
          const TwoBsSolution sol = solve(prob);
          const GridOracleResult g = grid_beta_oracle(prob, opt.bulk_step, 1000000000);
          // Compare g - g(0) so the shared compute constant does not hide gaps.
          const double gap = energy_delta(sol.beta1, prob) - energy_delta(g.beta1, prob);
          const double rel = std::max(0.0, gap) / std::abs(sol.energy_j);
          const bool pass = sol.feasible() && g.feasible &&
                            rel <= opt.energy_rel_tol &&
                            std::abs(sol.beta1 - g.beta1) <= 2.0 * opt.bulk_step;
          acc.add(pass, rel, g.beta1, sol.beta1, digest(prob), i);
        }));
  }
  // Deep set with a fine grid.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "grid_oracle_deep", s, opt.deep_beta_tol, opt.deep_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          const TwoBsProblem prob = instance(s, i, ranges);
          const TwoBsSolution sol = solve(prob);
          const GridOracleResult g = grid_beta_oracle(prob, opt.deep_step, 1000);
          const double gap = energy_delta(sol.beta1, prob) - energy_delta(g.beta1, prob);
          const double rel = std::max(0.0, gap) / std::abs(sol.energy_j);
          const double beta_gap = std::abs(sol.beta1 - g.beta1);
          const bool pass = g.identity_ok && rel <= opt.energy_rel_tol &&
                            beta_gap <= opt.deep_beta_tol;
          acc.add(pass, beta_gap, g.beta1, sol.beta1, digest(prob), i);
        }));
  }
  // Closed-form g against the objective written from rates and times.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "objective_identity", s, opt.identity_rel_tol, opt.identity_pairs, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          Rng rng(split_seed(s, i));
          const TwoBsProblem prob = random_instance(rng, ranges, gain);
          const double upper = feasibility(prob).beta1_upper;
          const double beta = upper * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
          const PowerPair p = optimal_powers(beta, prob);
          const double raw = raw_objective(beta, p.p1_w, p.p2_w, prob);
          const double g = energy_of_split(beta, prob);
          const double rel = detail::rel_diff(raw, g);
          acc.add(rel <= opt.identity_rel_tol, rel, raw, g, digest(prob), i);
        }));
  }
  // Second derivative.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "curvature", s, opt.curvature_rel_tol, opt.curvature_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          Rng rng(split_seed(s, i));
          TwoBsProblem prob = random_instance(rng, ranges, gain);
          if (prob.inv_gain_gap() == 0.0) return;
          const double k = prob.a_exponent() * std::numbers::ln2;
          const double h = std::min(1e-3, 1e-2 / k);
          const double beta =
              std::uniform_real_distribution<double>(h, 1.0 - h)(rng);
          const double fd = (offload_excess(beta + h, prob) - 2.0 * offload_excess(beta, prob) +
                             offload_excess(beta - h, prob)) /
                            (h * h);
          const double exact = energy_curvature(beta, prob);
          const double rel = detail::rel_diff(fd, exact);
          acc.add(rel <= opt.curvature_rel_tol, rel, fd, exact, digest(prob), i);
        }));
  }
  // Convexity through three-point interpolation.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "convexity", s, opt.convexity_abs_tol, opt.convexity_triples, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          Rng rng(split_seed(s, i));
          const TwoBsProblem prob = random_instance(rng, ranges, gain);
          std::uniform_real_distribution<double> u(0.0, 1.0);
          std::array<double, 3> b{u(rng), u(rng), u(rng)};
          std::sort(b.begin(), b.end());
          if (b[0] == b[2]) return;
          const double ga = energy_of_split(b[0], prob);
          const double gb = energy_of_split(b[1], prob);
          const double gc = energy_of_split(b[2], prob);
          const double chord = ga + (gc - ga) * (b[1] - b[0]) / (b[2] - b[0]);
          const double excess = gb - chord;
          acc.add(excess <= opt.convexity_abs_tol, std::max(0.0, excess), gb, chord,
                  digest(prob), i);
        }));
  }
  // Energy monotone in both powers.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "power_monotonicity", s, opt.monotonicity_floor, opt.monotonicity_instances,
        opt.threads, [&](std::size_t i, detail::CheckAccumulator& acc) {
          const TwoBsProblem prob = instance(s, i, ranges);
          const OracleReport r = power_monotonicity_probe(prob, opt.monotonicity_points,
                                                          split_seed(s, i), opt.monotonicity_floor);
          acc.add(r.pass, -std::min(0.0, r.oracle_value), r.oracle_value, 0.0, r.digest, i);
        }));
  }
  // Outage calibration inside the approximation regime.
  {
    const std::uint64_t s = next_seed();
    InstanceRanges r = ranges;
    r.err_var_min = opt.outage_err_var_min;
    r.err_var_max = opt.outage_err_var_max;
    std::vector<std::vector<OracleReport>> rows(opt.outage_instances);
    OracleReport hard = detail::run_check(
        "outage_calibration", s, opt.outage_band, opt.outage_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator&) {
          const TwoBsProblem prob = instance(s, i, r);
          OutageOptions oo;
          oo.n_trials = opt.outage_trials;
          oo.band = opt.outage_band;
          rows[i] = outage_validation(prob, solve(prob), split_seed(s, i), oo);
        });
    OracleReport info = hard;
    info.check = "outage_out_of_regime";
    info.hard = false;
    std::size_t in_total = 0, in_pass = 0, out_total = 0;
    double in_bias = 0.0, out_bias = 0.0, worst = -1.0, out_worst = -1.0;
    for (const auto& inst : rows)
      for (const auto& row : inst) {
        const double signed_gap = row.oracle_value - row.closed_form_value;
        if (row.hard) {
          ++in_total;
          in_pass += row.pass ? 1 : 0;
          in_bias += signed_gap;
          if (row.abs_gap > worst) {
            worst = row.abs_gap;
            hard.digest = row.digest;
            hard.oracle_value = row.oracle_value;
            hard.closed_form_value = row.closed_form_value;
          }
        } else {
          ++out_total;
          out_bias += signed_gap;
          if (row.abs_gap > out_worst) {
            out_worst = row.abs_gap;
            info.digest = row.digest;
            info.oracle_value = row.oracle_value;
            info.closed_form_value = row.closed_form_value;
          }
        }
      }
    if (hard.digest.rfind("exception", 0) != 0) {
      hard.samples = in_total;
      hard.failures = in_total - in_pass;
      // abs_gap carries the worst deviation, rel_gap the mean signed bias.
      hard.abs_gap = std::max(0.0, worst);
      hard.rel_gap = in_total ? in_bias / static_cast<double>(in_total) : 0.0;
      hard.pass = in_total > 0 && static_cast<double>(in_pass) >=
                                      opt.outage_pass_fraction * static_cast<double>(in_total);
      info.samples = out_total;
      info.failures = 0;
      info.abs_gap = std::max(0.0, out_worst);
      info.rel_gap = out_total ? out_bias / static_cast<double>(out_total) : 0.0;
      info.pass = true;
      reps.push_back(hard);
      reps.push_back(info);
    } else {
      reps.push_back(hard);
    }
  }
  // Case conditions against the candidate argmin.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "case_consistency", s, opt.case_beta_tol, opt.case_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          const TwoBsProblem prob = instance(s, i, ranges);
          const TwoBsSolution sol = solve(prob);
          if (!sol.classifier_matched) {
            acc.add(false, std::numeric_limits<double>::infinity(), sol.classifier_beta1,
                    sol.beta1, digest(prob), i);
            return;
          }
          const double gap = std::abs(sol.classifier_beta1 - sol.beta1);
          acc.add(gap <= opt.case_beta_tol, gap, sol.classifier_beta1, sol.beta1, digest(prob),
                  i);
        }));
  }
  // ECE sign at the endpoints.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "ece_sign", s, 0.0, opt.ece_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          const TwoBsProblem prob = instance(s, i, ranges);
          const TwoBsSolution sol = solve(prob);
          const EceBreakdown e0 = ece_difference(0.0, prob);
          const EceBreakdown e1 = ece_difference(1.0, prob);
          bool pass = e0.offload_part >= 0.0 && e1.offload_part >= 0.0 &&
                      e0.compute_part == e1.compute_part;
          double value = 0.0;
          if (sol.label == CaseLabel::case5_oma_bs2) {
            value = e0.total;
            pass = pass && e0.total >= 0.0;
          } else if (sol.label == CaseLabel::case1_oma_bs1) {
            value = e1.total;
            pass = pass && e1.total <= 0.0;
          }
          acc.add(pass, pass ? 0.0 : std::abs(value), value, 0.0, digest(prob), i);
        }));
  }
  // Effective gain and rate monotonicity.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "gain_properties", s, 0.0, opt.gain_points, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          Rng rng(split_seed(s, i));
          SystemParams p = ranges.base;
          LinkEstimate l;
          l.distance_m = detail::uniform(rng, ranges.distance_min_m, ranges.distance_max_m);
          l.est_gain = std::exponential_distribution<double>(1.0 / ranges.est_gain_mean)(rng);
          l.err_var = detail::log_uniform(rng, ranges.err_var_min, ranges.err_var_max);
          const double h = gain(l, p);
          LinkEstimate more = l, farther = l;
          more.est_gain = l.est_gain * (1.0 + 1e-6) + 1e-9;
          farther.distance_m = l.distance_m * (1.0 + 1e-6);
          const double h_more = gain(more, p);
          const double h_far = gain(farther, p);
          bool pass = h > 0.0 && h_more > h && h_far < h;
          if (pass) {
            const double r = effective_rate(1e-3, 1e-3, h, p);
            pass = effective_rate(1e-3 * (1.0 + 1e-6), 1e-3, h, p) > r &&
                   effective_rate(1e-3, 1e-3 * (1.0 + 1e-6), h, p) < r;
          }
          acc.add(pass, pass ? 0.0 : 1.0, h, 0.0, "", i);
        }));
  }
  // Times and power budget at the optimum.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "constraints_at_optimum", s, opt.time_rel_tol, opt.constraint_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          const TwoBsProblem prob = instance(s, i, ranges);
          const TwoBsSolution sol = solve(prob);
          const OffloadTimes t = offload_times(sol.beta1, sol.p1_w, sol.p2_w, prob);
          const double tmax = prob.params.t_max_s;
          double gap = 0.0;
          if (sol.beta1 > 0.0) gap = std::max(gap, std::abs(t.t1_s - tmax) / tmax);
          if (sol.beta1 < 1.0) gap = std::max(gap, std::abs(t.t2_s - tmax) / tmax);
          const bool power_ok =
              sol.p1_w >= 0.0 && sol.p2_w >= 0.0 &&
              sol.p1_w + sol.p2_w <= prob.params.p_max_w + opt.power_abs_tol;
          acc.add(power_ok && gap <= opt.time_rel_tol, gap, tmax, tmax, digest(prob), i);
        }));
  }
  // A depends only on L / T_max.
  {
    const std::uint64_t s = next_seed();
    reps.push_back(detail::run_check(
        "load_time_scaling", s, opt.scaling_rel_tol, opt.scaling_instances, opt.threads,
        [&](std::size_t i, detail::CheckAccumulator& acc) {
          Rng rng(split_seed(s, i));
          const TwoBsProblem prob = random_instance(rng, ranges, gain);
          const double k = detail::log_uniform(rng, 0.1, 10.0);
          TwoBsProblem scaled = prob;
          scaled.task.bits *= k;
          scaled.params.t_max_s *= k;
          const TwoBsSolution a = solve(prob);
          const TwoBsSolution b = solve(scaled);
          double gap = detail::rel_diff(prob.a_exponent(), scaled.a_exponent());
          gap = std::max(gap, std::abs(a.beta1 - b.beta1));
          gap = std::max(gap, detail::rel_diff(a.p1_w, b.p1_w) * (a.p1_w > 0.0));
          gap = std::max(gap, detail::rel_diff(a.p2_w, b.p2_w) * (a.p2_w > 0.0));
          acc.add(gap <= opt.scaling_rel_tol, gap, b.beta1, a.beta1, digest(prob), i);
        }));
  }
  // Swap matching against exhaustive search, three users and three BSs.
  {
    const std::uint64_t s = next_seed();
    MatchingSpec ms;
    ms.users = 3;
    ms.base_stations = 3;
    ms.draws = opt.matching_instances;
    ms.seed = s;
    ms.threads = opt.threads;
    OracleReport rep;
    rep.check = "matching_vs_exhaustive";
    rep.seed = s;
    rep.tolerance = opt.matching_optimal_fraction;
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto records = run_matching_experiment(ms);
      std::size_t optimal = 0, unstable = 0;
      double worst = 0.0;
      for (const auto& r : records) {
        optimal += r.optimal ? 1 : 0;
        unstable += r.stable ? 0 : 1;
        const double gap = detail::rel_diff(r.swap_energy_j, r.exhaustive_energy_j);
        if (gap > worst) {
          worst = gap;
          rep.oracle_value = r.exhaustive_energy_j;
          rep.closed_form_value = r.swap_energy_j;
          rep.digest = "draw " + std::to_string(r.draw);
        }
      }
      rep.samples = records.size();
      rep.failures = records.size() - optimal + unstable;
      rep.abs_gap = static_cast<double>(optimal) / static_cast<double>(records.size());
      rep.rel_gap = worst;
      rep.pass = unstable == 0 && rep.abs_gap >= opt.matching_optimal_fraction;
    } catch (const std::exception& e) {
      rep.pass = false;
      rep.failures = 1;
      rep.digest = std::string("exception: ") + e.what();
    }
    rep.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    reps.push_back(rep);
  }

  VerifySummary sum;
  sum.reports = std::move(reps);
  for (const auto& r : sum.reports) {
    if (!r.hard) ++sum.informational;
    else if (r.pass) ++sum.passed;
    else ++sum.failed;
  }
  return sum;
}

}  // namespace nomamec
