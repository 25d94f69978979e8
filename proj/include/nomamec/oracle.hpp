#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nomamec/association.hpp"
#include "nomamec/channel.hpp"
#include "nomamec/params.hpp"
#include "nomamec/rng.hpp"
#include "nomamec/two_bs.hpp"

namespace nomamec {

// Brute-force and stochastic checks for the closed forms. The objective used
// here is written out from the rate/time definitions and does not call
// energy_of_split, so a slip in the closed form cannot hide behind itself.

using GainModel = std::function<double(const LinkEstimate&, const SystemParams&)>;

inline GainModel default_gain_model() {
  return [](const LinkEstimate& l, const SystemParams& p) { return effective_gain(l, p); };
}

struct OracleReport {
  std::string check;
  std::string digest;  // instance digest (worst instance for aggregated rows)
  std::uint64_t seed = 0;
  double oracle_value = 0.0;
  double closed_form_value = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  bool hard = true;  // informational rows never fail the battery
  bool pass = true;
  double runtime_ms = 0.0;
};

/// FNV-1a over the numeric fields of an instance, as 16 hex digits.
inline std::string digest(const TwoBsProblem& prob) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  };
  for (double v : {prob.params.bandwidth_hz, prob.params.noise_psd_dbm_hz, prob.params.path_loss_exp,
                   prob.params.outage_eps, prob.params.t_max_s, prob.params.p_max_w, prob.task.bits,
                   prob.task.cycles_per_bit, prob.gains[0], prob.gains[1], prob.servers[0].kappa,
                   prob.servers[0].cpu_hz, prob.servers[1].kappa, prob.servers[1].cpu_hz})
    mix(v);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Random instances

/// Sampling ranges for random two-BS instances. Log-uniform where marked.
struct InstanceRanges {
  SystemParams base;  // bandwidth, noise, path loss, outage are taken from here
  double distance_min_m = 40.0;
  double distance_max_m = 500.0;
  double est_gain_mean = 1.0;           // exponential
  double err_var_min = 1e-2;            // log-uniform
  double err_var_max = 2.0;
  double bits_min = 1e6;                // log-uniform
  double bits_max = 1e8;
  double cycles_per_bit = 1e3;
  double kappa_min = 0.5e-28;           // log-uniform
  double kappa_max = 1.5e-28;
  double cpu_min_hz = 0.5e9;
  double cpu_max_hz = 1.2e9;
  double t_max_min_s = 1e-3;            // log-uniform
  double t_max_max_s = 1e-1;
  double p_max_min_w = 1e-3;            // log-uniform
  double p_max_max_w = 1.0;
  /// Fraction of instances whose BS2 compute energy is pulled close to BS1's,
  /// so the offloading and computing trade-off is balanced.
  double balanced_fraction = 0.5;
  double balanced_spread = 0.02;
  std::size_t max_attempts = 10000;
};

namespace detail {

inline double log_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

}  // namespace detail

/// Draws instances until one is feasible. Deterministic in the rng state.
inline TwoBsProblem random_instance(Rng& rng, const InstanceRanges& r,
                                    const GainModel& gain = default_gain_model()) {
  std::exponential_distribution<double> est(1.0 / r.est_gain_mean);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t attempt = 0; attempt < r.max_attempts; ++attempt) {
    SystemParams params = r.base;
    params.t_max_s = detail::log_uniform(rng, r.t_max_min_s, r.t_max_max_s);
    params.p_max_w = detail::log_uniform(rng, r.p_max_min_w, r.p_max_max_w);
    TaskProfile task{detail::log_uniform(rng, r.bits_min, r.bits_max), r.cycles_per_bit};
    std::array<ServerProfile, 2> servers;
    for (auto& s : servers) {
      s.kappa = detail::log_uniform(rng, r.kappa_min, r.kappa_max);
      s.cpu_hz = detail::uniform(rng, r.cpu_min_hz, r.cpu_max_hz);
    }
    std::array<LinkEstimate, 2> links;
    for (auto& l : links) {
      l.distance_m = detail::uniform(rng, r.distance_min_m, r.distance_max_m);
      l.est_gain = est(rng);
      l.err_var = detail::log_uniform(rng, r.err_var_min, r.err_var_max);
    }
    const bool balanced = unit(rng) < r.balanced_fraction;
    const double spread = detail::uniform(rng, -r.balanced_spread, r.balanced_spread);
    TwoBsProblem prob = make_two_bs_problem(params, task, links, servers, gain);
    if (balanced) {
      // Rescale the role-2 capacitance so E2c = E1c (1 + spread).
      const double ratio = prob.compute_energy(0) / prob.compute_energy(1);
      prob.servers[1].kappa *= ratio * (1.0 + spread);
    }
    if (feasibility(prob).feasible) return prob;
  }
  throw ParameterError("no feasible instance within max_attempts draws");
}

inline TwoBsProblem random_instance(std::uint64_t seed, const InstanceRanges& r,
                                    const GainModel& gain = default_gain_model()) {
  Rng rng(seed);
  return random_instance(rng, r, gain);
}

// ---------------------------------------------------------------------------
// Objective written from first principles

namespace detail {

inline double rate_discount(const TwoBsProblem& prob) {
  return prob.csi == CsiMode::perfect ? 1.0 : 1.0 - prob.params.outage_eps;
}

/// Seconds to push `bits` at the outage-discounted rate of SINR `sinr`.
inline double transfer_time(double bits, double sinr, const TwoBsProblem& prob) {
  if (bits == 0.0) return 0.0;
  const double rate = rate_discount(prob) * prob.params.bandwidth_hz * std::log1p(sinr) /
                      std::numbers::ln2;
  return rate > 0.0 ? bits / rate : std::numeric_limits<double>::infinity();
}

}  // namespace detail

struct OffloadTimes {
  double t1_s = 0.0;
  double t2_s = 0.0;
};

inline OffloadTimes offload_times(double beta1, double p1, double p2, const TwoBsProblem& prob) {
  const double bits = prob.task.bits;
  OffloadTimes t;
  t.t1_s = detail::transfer_time(beta1 * bits, prob.h1() * p1 / (prob.h1() * p2 + 1.0), prob);
  t.t2_s = detail::transfer_time((1.0 - beta1) * bits, prob.h2() * p2, prob);
  return t;
}

/// Energy of a split at arbitrary powers: each link transmits for bits/rate
/// seconds, plus server energy for the bits it receives. +inf when a link
/// carries bits at zero rate.
inline double raw_objective(double beta1, double p1, double p2, const TwoBsProblem& prob) {
  const OffloadTimes t = offload_times(beta1, p1, p2, prob);
  auto link_energy = [](bool loaded, double time, double power) {
    if (!loaded) return 0.0;
    return std::isinf(time) ? std::numeric_limits<double>::infinity() : time * power;
  };
  const double offload = link_energy(beta1 > 0.0, t.t1_s, p1) + link_energy(beta1 < 1.0, t.t2_s, p2);
  const double lc = prob.task.bits * prob.task.cycles_per_bit;
  const double f1 = prob.servers[0].cpu_hz;
  const double f2 = prob.servers[1].cpu_hz;
  const double compute = prob.servers[0].kappa * beta1 * lc * f1 * f1 +
                         prob.servers[1].kappa * (1.0 - beta1) * lc * f2 * f2;
  return offload + compute;
}

// ---------------------------------------------------------------------------
// Grid oracle

struct GridOracleResult {
  bool feasible = false;
  double beta1 = std::numeric_limits<double>::quiet_NaN();
  double energy = std::numeric_limits<double>::quiet_NaN();  // raw objective at beta1
  std::size_t points = 0;
  std::size_t identity_checks = 0;
  double max_identity_rel_gap = 0.0;
  bool identity_ok = true;
};

/// Scans beta = 0, step, 2 step, ... up to 1, keeps points whose minimal powers
/// fit the budget, and returns the one with the least energy. Every
/// `identity_stride`-th point also compares the first-principles objective
/// against energy_of_split.
inline GridOracleResult grid_beta_oracle(const TwoBsProblem& prob, double step,
                                         std::size_t identity_stride = 1,
                                         double identity_rel_tol = 1e-9,
                                         double power_abs_tol = 1e-12) {
  detail::require(step > 0.0 && step <= 0.01, "grid step must lie in (0, 0.01]");
  detail::require(identity_stride >= 1, "identity_stride must be at least 1");
  GridOracleResult r;
  const auto n = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
  double best_delta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n; ++k) {
    const double beta = std::min(1.0, static_cast<double>(k) * step);
    const PowerPair p = optimal_powers(beta, prob);
    // Power sum grows with beta when H1 <= H2, so the feasible points form a prefix.
    if (p.total() > prob.params.p_max_w + power_abs_tol) break;
    r.feasible = true;
    ++r.points;
    // g(beta) - g(0); the compute-energy constant would drown the differences.
    const double delta = energy_delta(beta, prob);
    if (delta < best_delta) {
      best_delta = delta;
      r.beta1 = beta;
    }
    if (k % identity_stride == 0) {
      const double raw = raw_objective(beta, p.p1_w, p.p2_w, prob);
      const double g = energy_of_split(beta, prob);
      const double gap = std::abs(raw - g) / std::max(std::abs(g), 1e-300);
      r.max_identity_rel_gap = std::max(r.max_identity_rel_gap, gap);
      r.identity_ok = r.identity_ok && gap <= identity_rel_tol;
      ++r.identity_checks;
    }
  }
  if (r.feasible) {
    const PowerPair p = optimal_powers(r.beta1, prob);
    r.energy = raw_objective(r.beta1, p.p1_w, p.p2_w, prob);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Power monotonicity

/// Samples (beta, p1, p2) with p1 + p2 <= P_max and checks forward-difference
/// partials of the first-principles energy in p1 and p2 are not negative.
inline OracleReport power_monotonicity_probe(const TwoBsProblem& prob, std::size_t n_points,
                                             std::uint64_t seed, double floor = -1e-12) {
  detail::require(n_points >= 100, "power_monotonicity_probe needs at least 100 points");
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pmax = prob.params.p_max_w;
  const double h = 1e-7 * pmax;
  OracleReport rep;
  rep.check = "power_monotonicity";
  rep.digest = digest(prob);
  rep.seed = seed;
  rep.tolerance = floor;
  rep.oracle_value = std::numeric_limits<double>::infinity();  // smallest partial seen
  for (std::size_t i = 0; i < n_points; ++i) {
    // Stay off the zero-power faces where a loaded link has zero rate.
    const double beta = 0.01 + 0.98 * unit(rng);
    const double p1 = pmax * (0.001 + 0.998 * unit(rng));
    const double p2 = (pmax - p1 - h) * (0.001 + 0.998 * unit(rng));
    const double e = raw_objective(beta, p1, p2, prob);
    const double d1 = (raw_objective(beta, p1 + h, p2, prob) - e) / h;
    const double d2 = (raw_objective(beta, p1, p2 + h, prob) - e) / h;
    rep.samples += 2;
    for (double d : {d1, d2}) {
      rep.oracle_value = std::min(rep.oracle_value, d);
      if (!(d >= floor)) ++rep.failures;
    }
  }
  rep.abs_gap = std::min(0.0, rep.oracle_value);
  rep.pass = rep.failures == 0;
  rep.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Outage calibration

struct OutageOptions {
  std::size_t n_trials = 100000;
  double band = 0.02;
  double regime_max = 0.2;  // lambda^2/2 bound for hard rows
};

/// For each link of a solved instance that carries bits, measures the
/// empirical outage at the solved powers and target rate. One row per link;
/// rows outside the chi-square regime are informational.
inline std::vector<OracleReport> outage_validation(const TwoBsProblem& prob,
                                                   const TwoBsSolution& sol, std::uint64_t seed,
                                                   const OutageOptions& opt = {}) {
  std::vector<OracleReport> rows;
  if (!sol.feasible() || !prob.has_links()) return rows;
  for (std::size_t m = 0; m < 2; ++m) {
    const double share = m == 0 ? sol.beta1 : 1.0 - sol.beta1;
    if (share <= 0.0) continue;  // no transmission on this link
    const LinkEstimate& link = prob.links[m];
    if (link.perfect_csi()) continue;
    const double p_self = m == 0 ? sol.p1_w : sol.p2_w;
    const double p_interf = m == 0 ? sol.p2_w : 0.0;
    const auto start = std::chrono::steady_clock::now();
    const double target = outage_target_rate(p_self, p_interf, prob.gains[m], prob.params);
    const std::uint64_t link_seed = split_seed(seed, m);
    const double empirical =
        empirical_outage(link, prob.params, p_self, p_interf, target, opt.n_trials, link_seed);
    OracleReport rep;
    rep.check = m == 0 ? "outage_link1" : "outage_link2";
    rep.digest = digest(prob);
    rep.seed = link_seed;
    rep.oracle_value = empirical;
    rep.closed_form_value = prob.params.outage_eps;
    rep.abs_gap = std::abs(empirical - prob.params.outage_eps);
    rep.rel_gap = rep.abs_gap / prob.params.outage_eps;
    rep.tolerance = opt.band;
    rep.samples = opt.n_trials;
    rep.hard = lambda_half(link) <= opt.regime_max;
    rep.pass = rep.abs_gap <= opt.band;
    rep.failures = rep.pass ? 0 : 1;
    rep.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(rep));
  }
  return rows;
}

}  // namespace nomamec
