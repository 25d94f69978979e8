#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nomamec/association.hpp"
#include "nomamec/channel.hpp"
#include "nomamec/deployment.hpp"
#include "nomamec/error.hpp"
#include "nomamec/oracle.hpp"
#include "nomamec/params.hpp"
#include "nomamec/rng.hpp"
#include "nomamec/two_bs.hpp"

namespace nomamec {

enum class SweepVariable { t_max, p_max, f2, err_var, outage_eps, cell_radius };

inline std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::t_max: return "t_max";
    case SweepVariable::p_max: return "p_max";
    case SweepVariable::f2: return "f2";
    case SweepVariable::err_var: return "err_var";
    case SweepVariable::outage_eps: return "outage_eps";
    case SweepVariable::cell_radius: return "cell_radius";
  }
  return "unknown";
}

inline std::optional<SweepVariable> parse_sweep_variable(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(SweepVariable::cell_radius); ++i) {
    const auto v = static_cast<SweepVariable>(i);
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

enum class Scheme { optimal, priority_bs1, priority_bs2 };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::optimal: return "optimal";
    case Scheme::priority_bs1: return "priority_bs1";
    case Scheme::priority_bs2: return "priority_bs2";
  }
  return "unknown";
}

inline std::optional<Scheme> parse_scheme(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Scheme::priority_bs2); ++i) {
    const auto v = static_cast<Scheme>(i);
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

/// One user and two BSs dropped in a disc, swept over one parameter.
/// servers[0] serves the BS with the weaker effective gain, servers[1] the
/// stronger one.
struct SweepSpec {
  SweepVariable variable = SweepVariable::p_max;
  std::vector<double> values;
  std::size_t draws = 500;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  SystemParams params;
  TaskProfile task;
  std::array<ServerProfile, 2> servers{ServerProfile{0.8e-28, 0.8e9}, ServerProfile{1.2e-28, 1e9}};
  Deployment deployment;
  /// Monte Carlo trials per link for the outage column; 0 disables it.
  std::size_t outage_trials = 0;

  void validate() const {
    detail::require(!values.empty(), "sweep needs at least one value");
    for (std::size_t i = 1; i < values.size(); ++i)
      detail::require(values[i] > values[i - 1], "sweep values must be strictly increasing");
    detail::require(draws >= 1, "sweep needs at least one draw per value");
    detail::require(outage_trials == 0 || outage_trials >= 10000,
                    "outage_trials must be 0 or at least 1e4");
    params.validate();
    task.validate();
    for (const auto& s : servers) s.validate();
    deployment.validate();
  }
};

/// Copy of the spec's fixed settings with the swept variable set to `value`.
struct SweepPoint {
  SystemParams params;
  TaskProfile task;
  std::array<ServerProfile, 2> servers;
  Deployment deployment;
};

inline SweepPoint sweep_point(const SweepSpec& spec, double value) {
  SweepPoint pt{spec.params, spec.task, spec.servers, spec.deployment};
  switch (spec.variable) {
    case SweepVariable::t_max: pt.params.t_max_s = value; break;
    case SweepVariable::p_max: pt.params.p_max_w = value; break;
    case SweepVariable::f2: pt.servers[1].cpu_hz = value; break;
    case SweepVariable::err_var: pt.deployment.err_var = value; break;
    case SweepVariable::outage_eps: pt.params.outage_eps = value; break;
    case SweepVariable::cell_radius: pt.deployment.cell_radius_m = value; break;
  }
  return pt;
}

/// Builds the two-BS instance of one draw. The same draw index gives the same
/// underlying uniforms and Gaussians at every sweep value.
inline TwoBsProblem draw_two_bs_problem(const SweepPoint& pt, std::uint64_t draw_seed) {
  Rng rng(draw_seed);
  const Placement pl = place(rng, pt.deployment, 1, 2);
  auto links = draw_links(rng, pl, pt.deployment.err_var, pt.params)[0];
  for (auto& l : links) l = with_effective_gain(l, pt.params);
  if (links[1].eff_gain < links[0].eff_gain) std::swap(links[0], links[1]);
  TwoBsProblem prob = make_two_bs_problem(pt.params, pt.task, {links[0], links[1]}, pt.servers);
  return prob;
}

struct BaselineOutcome {
  bool feasible = false;
  double beta1 = std::numeric_limits<double>::quiet_NaN();
  double energy_j = std::numeric_limits<double>::quiet_NaN();
  bool spilled = false;
};

/// Priority offloading: every bit goes to `role` alone when its single-link
/// power fits the budget. Otherwise both links are used with the budget split
/// in proportion to the effective gains, both transmissions lasting until the
/// task is delivered; infeasible when that takes longer than T_max.
inline BaselineOutcome priority_baseline(const TwoBsProblem& prob, std::size_t role) {
  detail::require(role < 2, "role must be 0 or 1");
  BaselineOutcome out;
  if (!feasibility(prob).feasible) return out;
  const double a = prob.a_exponent();
  const double p_alone = std::expm1(a * std::numbers::ln2) / prob.gains[role];
  if (p_alone <= prob.params.p_max_w) {
    out.feasible = true;
    out.beta1 = role == 0 ? 1.0 : 0.0;
    out.energy_j = energy_of_split(out.beta1, prob);
    return out;
  }
  const double pmax = prob.params.p_max_w;
  const double p1 = pmax * prob.h1() / (prob.h1() + prob.h2());
  const double p2 = pmax - p1;
  const CsiMode mode = prob.csi;
  const double r1 = effective_rate(p1, p2, prob.h1(), prob.params, mode);
  const double r2 = effective_rate(p2, 0.0, prob.h2(), prob.params, mode);
  if (prob.task.bits / (r1 + r2) > prob.params.t_max_s) return out;
  out.feasible = true;
  out.spilled = true;
  out.beta1 = r1 / (r1 + r2);
  out.energy_j = raw_objective(out.beta1, p1, p2, prob);
  return out;
}

struct DrawOutcome {
  bool feasible = false;
  CaseLabel label = CaseLabel::infeasible;
  double beta1 = std::numeric_limits<double>::quiet_NaN();
  double energy_j = std::numeric_limits<double>::quiet_NaN();
  std::array<BaselineOutcome, 2> baselines{};  // priority_bs1, priority_bs2
  double mean_outage = std::numeric_limits<double>::quiet_NaN();
};

/// Per-draw outcomes, outcomes[value][draw].
struct SweepTable {
  SweepSpec spec;
  std::vector<std::vector<DrawOutcome>> outcomes;
  std::size_t dominance_checked = 0;
  std::size_t dominance_violations = 0;
};

inline SweepTable evaluate_sweep(const SweepSpec& spec, bool with_baselines) {
  spec.validate();
  SweepTable table;
  table.spec = spec;
  const std::size_t nv = spec.values.size();
  table.outcomes.assign(nv, std::vector<DrawOutcome>(spec.draws));
  std::vector<SweepPoint> points;
  for (double v : spec.values) points.push_back(sweep_point(spec, v));

  parallel_for(nv * spec.draws, spec.threads, [&](std::size_t idx) {
    const std::size_t vi = idx / spec.draws;
    const std::size_t d = idx % spec.draws;
    const std::uint64_t draw_seed = split_seed(spec.seed, d);
    const TwoBsProblem prob = draw_two_bs_problem(points[vi], draw_seed);
    const TwoBsSolution sol = solve(prob);
    DrawOutcome& out = table.outcomes[vi][d];
    out.label = sol.label;
    out.feasible = sol.feasible();
    if (!out.feasible) return;
    out.beta1 = sol.beta1;
    out.energy_j = sol.energy_j;
    if (with_baselines) {
      out.baselines[0] = priority_baseline(prob, 0);
      out.baselines[1] = priority_baseline(prob, 1);
    }
    if (spec.outage_trials > 0) {
      OutageOptions opt;
      opt.n_trials = spec.outage_trials;
      const auto rows = outage_validation(prob, sol, draw_seed, opt);
      if (!rows.empty()) {
        double sum = 0.0;
        for (const auto& r : rows) sum += r.oracle_value;
        out.mean_outage = sum / static_cast<double>(rows.size());
      }
    }
  });

  if (with_baselines) {
    for (const auto& row : table.outcomes)
      for (const auto& o : row)
        for (const auto& b : o.baselines)
          if (o.feasible && b.feasible) {
            ++table.dominance_checked;
            if (!(o.energy_j <= b.energy_j)) ++table.dominance_violations;
          }
  }
  return table;
}

/// Aggregated statistics of one scheme at one sweep value.
struct TrialRecord {
  Scheme scheme = Scheme::optimal;
  SweepVariable variable = SweepVariable::p_max;
  double value = 0.0;
  std::size_t draws = 0;
  std::size_t feasible_draws = 0;
  double mean_energy_j = std::numeric_limits<double>::quiet_NaN();
  double mean_beta1 = std::numeric_limits<double>::quiet_NaN();
  /// Means over the draws this scheme serves at every sweep value.
  std::size_t common_draws = 0;
  double mean_energy_common_j = std::numeric_limits<double>::quiet_NaN();
  double mean_beta1_common = std::numeric_limits<double>::quiet_NaN();
  std::array<std::size_t, 6> case_counts{};  // case1..case5, infeasible
  double mean_outage = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline const BaselineOutcome* scheme_outcome(const DrawOutcome& o, Scheme s,
                                             BaselineOutcome& scratch) {
  if (s == Scheme::optimal) {
    scratch = {o.feasible, o.beta1, o.energy_j, false};
    return &scratch;
  }
  return &o.baselines[s == Scheme::priority_bs1 ? 0 : 1];
}

}  // namespace detail

inline std::vector<TrialRecord> aggregate(const SweepTable& table, Scheme scheme) {
  const SweepSpec& spec = table.spec;
  const std::size_t nv = spec.values.size();
  std::vector<bool> common(spec.draws, true);
  BaselineOutcome scratch;
  for (std::size_t v = 0; v < nv; ++v)
    for (std::size_t d = 0; d < spec.draws; ++d)
      common[d] = common[d] && detail::scheme_outcome(table.outcomes[v][d], scheme, scratch)->feasible;

  std::vector<TrialRecord> records;
  for (std::size_t v = 0; v < nv; ++v) {
    TrialRecord r;
    r.scheme = scheme;
    r.variable = spec.variable;
    r.value = spec.values[v];
    r.draws = spec.draws;
    double e_sum = 0.0, b_sum = 0.0, ec_sum = 0.0, bc_sum = 0.0, out_sum = 0.0;
    std::size_t out_n = 0;
    for (std::size_t d = 0; d < spec.draws; ++d) {
      const DrawOutcome& o = table.outcomes[v][d];
      const BaselineOutcome* s = detail::scheme_outcome(o, scheme, scratch);
      if (scheme == Scheme::optimal) ++r.case_counts[case_index(o.label)];
      if (!s->feasible) continue;
      ++r.feasible_draws;
      e_sum += s->energy_j;
      b_sum += s->beta1;
      if (common[d]) {
        ++r.common_draws;
        ec_sum += s->energy_j;
        bc_sum += s->beta1;
      }
      if (scheme == Scheme::optimal && std::isfinite(o.mean_outage)) {
        out_sum += o.mean_outage;
        ++out_n;
      }
    }
    if (r.feasible_draws > 0) {
      r.mean_energy_j = e_sum / static_cast<double>(r.feasible_draws);
      r.mean_beta1 = b_sum / static_cast<double>(r.feasible_draws);
    }
    if (r.common_draws > 0) {
      r.mean_energy_common_j = ec_sum / static_cast<double>(r.common_draws);
      r.mean_beta1_common = bc_sum / static_cast<double>(r.common_draws);
    }
    if (out_n > 0) r.mean_outage = out_sum / static_cast<double>(out_n);
    records.push_back(r);
  }
  return records;
}

inline std::vector<TrialRecord> run_sweep(const SweepSpec& spec) {
  return aggregate(evaluate_sweep(spec, false), Scheme::optimal);
}

/// Records for the optimal scheme followed by both priority baselines.
inline std::vector<TrialRecord> run_baselines(const SweepSpec& spec) {
  const SweepTable table = evaluate_sweep(spec, true);
  std::vector<TrialRecord> out;
  for (Scheme s : {Scheme::optimal, Scheme::priority_bs1, Scheme::priority_bs2}) {
    auto recs = aggregate(table, s);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matching experiment

struct MatchingSpec {
  std::size_t users = 3;
  std::size_t base_stations = 3;
  std::size_t draws = 200;
  std::uint64_t seed = 1;
  bool exhaustive = true;
  unsigned threads = 1;
  SystemParams params{1e9, -174.0, 3.76, 0.1, 0.1, 1.0};
  TaskProfile task{1e8, 1e3};
  /// One profile per BS; cycled when shorter than base_stations.
  std::vector<ServerProfile> servers{{0.8e-28, 0.8e9}, {1.2e-28, 1e9}, {0.8e-28, 0.8e9}};
  Deployment deployment;

  void validate() const {
    detail::require(users >= 1, "matching needs at least one user");
    detail::require(base_stations >= 2, "matching needs at least two base stations");
    detail::require(draws >= 1, "matching needs at least one draw");
    detail::require(!servers.empty(), "matching needs at least one server profile");
    params.validate();
    task.validate();
    for (const auto& s : servers) s.validate();
    deployment.validate();
  }
};

struct MatchRecord {
  std::size_t draw = 0;
  std::size_t users = 0;
  std::size_t base_stations = 0;
  double initial_energy_j = 0.0;
  double swap_energy_j = 0.0;
  double exhaustive_energy_j = std::numeric_limits<double>::quiet_NaN();
  bool optimal = false;  // swap result equals the exhaustive optimum
  bool stable = false;   // zero blocking pairs on a fresh scan
  bool penalized = false;
  std::size_t swaps = 0;
  std::size_t evaluations = 0;
  std::size_t final_scan_evaluations = 0;
  double swap_ms = 0.0;
  double exhaustive_ms = std::numeric_limits<double>::quiet_NaN();
};

inline Scenario draw_matching_scenario(const MatchingSpec& spec, std::uint64_t draw_seed) {
  Rng rng(draw_seed);
  std::vector<TaskProfile> tasks(spec.users, spec.task);
  std::vector<ServerProfile> servers(spec.base_stations);
  for (std::size_t m = 0; m < spec.base_stations; ++m)
    servers[m] = spec.servers[m % spec.servers.size()];
  return random_scenario(rng, spec.deployment, spec.params, tasks, servers);
}

inline std::vector<MatchRecord> run_matching_experiment(const MatchingSpec& spec) {
  spec.validate();
  const std::size_t pairs = spec.base_stations * (spec.base_stations - 1) / 2;
  if (spec.users > pairs)
    throw CapacityError("more users (" + std::to_string(spec.users) + ") than BS pairs (" +
                        std::to_string(pairs) + ")");
  using clock = std::chrono::steady_clock;
  std::vector<MatchRecord> records(spec.draws);
  parallel_for(spec.draws, spec.threads, [&](std::size_t d) {
    const std::uint64_t draw_seed = split_seed(spec.seed, d);
    const Scenario sc = draw_matching_scenario(spec, draw_seed);
    MatchRecord& r = records[d];
    r.draw = d;
    r.users = spec.users;
    r.base_stations = spec.base_stations;

    auto t0 = clock::now();
    const CostTable costs = build_cost_table(sc);
    const SwapMatchResult sm = swap_match(costs, ~draw_seed);
    r.swap_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    r.initial_energy_j = sm.initial_energy;
    r.swap_energy_j = sm.state.total_energy;
    r.penalized = sm.state.penalized;
    r.swaps = sm.swaps;
    r.evaluations = sm.evaluations;
    r.final_scan_evaluations = sm.final_scan_evaluations;
    r.stable = count_blocking_pairs(sm.state, costs) == 0;

    if (spec.exhaustive) {
      t0 = clock::now();
      const MatchState best = exhaustive_match(build_cost_table(sc));
      r.exhaustive_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      r.exhaustive_energy_j = best.total_energy;
      r.optimal = r.swap_energy_j <= best.total_energy * (1.0 + 1e-12);
    }
  });
  return records;
}

}  // namespace nomamec
