#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string_view>

#include "nomamec/channel.hpp"
#include "nomamec/error.hpp"
#include "nomamec/params.hpp"

namespace nomamec {

// Closed-form energy-minimal offloading of one user to two base stations over
// an uplink NOMA channel. Role 1 is the link with the weaker effective gain:
// BS1 decodes under interference from the BS2 stream, BS2 sees none.
//
// With beta the fraction of bits sent to BS1 and both transmissions lasting
// T_max, the minimal powers are
//
//   p2 = (2^{A(1-beta)} - 1) / H2
//   p1 = (2^{A beta} - 1) (p2 + 1/H1),        A = L / ((1-eps) B T_max)
//
// and the total energy is the convex function
//
//   g(beta) = T_max (2^A/H2 + 2^{A beta}(1/H1 - 1/H2) - 1/H1)
//             + (E1c - E2c) beta + E2c
//
// where Emc = kappa_m L c f_m^2 is the energy to compute the whole task at BSm.

enum class CaseLabel {
  case1_oma_bs1,
  case2_noma_boundary,
  case3_noma_interior,
  case4_noma_interior,
  case5_oma_bs2,
  infeasible,
};

inline std::string_view to_string(CaseLabel label) {
  switch (label) {
    case CaseLabel::case1_oma_bs1: return "case1_oma_bs1";
    case CaseLabel::case2_noma_boundary: return "case2_noma_boundary";
    case CaseLabel::case3_noma_interior: return "case3_noma_interior";
    case CaseLabel::case4_noma_interior: return "case4_noma_interior";
    case CaseLabel::case5_oma_bs2: return "case5_oma_bs2";
    case CaseLabel::infeasible: return "infeasible";
  }
  return "unknown";
}

inline std::optional<CaseLabel> parse_case_label(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(CaseLabel::infeasible); ++i) {
    const auto label = static_cast<CaseLabel>(i);
    if (to_string(label) == s) return label;
  }
  return std::nullopt;
}

/// Index 0..4 for case1..case5, 5 for infeasible.
constexpr std::size_t case_index(CaseLabel label) { return static_cast<std::size_t>(label); }

struct TwoBsProblem {
  SystemParams params;
  TaskProfile task;
  std::array<double, 2> gains{};  // H1 <= H2
  std::array<ServerProfile, 2> servers{};
  /// Source links in role order; distance_m == 0 when built from raw gains.
  std::array<LinkEstimate, 2> links{};
  /// Caller-side index of the BS playing each role.
  std::array<std::size_t, 2> source{0, 1};
  CsiMode csi = CsiMode::imperfect;

  double h1() const { return gains[0]; }
  double h2() const { return gains[1]; }

  /// A = L / ((1 - eps) B T_max); the outage discount is dropped under perfect CSI.
  double a_exponent() const {
    const double discount = csi == CsiMode::perfect ? 1.0 : 1.0 - params.outage_eps;
    return task.bits / (discount * params.bandwidth_hz * params.t_max_s);
  }

  /// 1/H1 - 1/H2 >= 0.
  double inv_gain_gap() const { return 1.0 / gains[0] - 1.0 / gains[1]; }

  double compute_energy(std::size_t role) const { return servers[role].full_task_energy(task); }

  /// kappa2 L c f2^2 - kappa1 L c f1^2; positive when BS1 computes cheaper.
  double compute_gap() const { return compute_energy(1) - compute_energy(0); }

  bool has_links() const { return links[0].distance_m > 0.0 && links[1].distance_m > 0.0; }

  void validate() const {
    params.validate();
    task.validate();
    servers[0].validate();
    servers[1].validate();
    detail::require(std::isfinite(gains[0]) && gains[0] > 0.0, "H1 must be positive and finite");
    detail::require(std::isfinite(gains[1]) && gains[1] > 0.0, "H2 must be positive and finite");
    detail::require(gains[0] <= gains[1], "links must be sorted so that H1 <= H2");
  }
};

namespace detail {

inline TwoBsProblem sorted_problem(TwoBsProblem prob) {
  if (prob.gains[0] > prob.gains[1]) {
    std::swap(prob.gains[0], prob.gains[1]);
    std::swap(prob.servers[0], prob.servers[1]);
    std::swap(prob.links[0], prob.links[1]);
    std::swap(prob.source[0], prob.source[1]);
  }
  prob.validate();
  return prob;
}

}  // namespace detail

/// Builds an instance from two estimated links; links and their servers are
/// reordered so the weaker effective gain takes the BS1 role. `gain` maps a
/// link to its effective gain (effective_gain unless a test swaps the model).
template <typename GainFn>
TwoBsProblem make_two_bs_problem(const SystemParams& params, const TaskProfile& task,
                                 const std::array<LinkEstimate, 2>& links,
                                 const std::array<ServerProfile, 2>& servers, GainFn&& gain) {
  detail::require(links[0].perfect_csi() == links[1].perfect_csi(),
                  "both links must share the same CSI mode");
  TwoBsProblem prob;
  prob.params = params;
  prob.task = task;
  prob.servers = servers;
  prob.csi = links[0].perfect_csi() ? CsiMode::perfect : CsiMode::imperfect;
  for (std::size_t m = 0; m < 2; ++m) {
    prob.links[m] = links[m];
    prob.links[m].eff_gain = gain(links[m], params);
    prob.gains[m] = prob.links[m].eff_gain;
  }
  return detail::sorted_problem(prob);
}

inline TwoBsProblem make_two_bs_problem(const SystemParams& params, const TaskProfile& task,
                                        const std::array<LinkEstimate, 2>& links,
                                        const std::array<ServerProfile, 2>& servers) {
  return make_two_bs_problem(params, task, links, servers,
                             [](const LinkEstimate& l, const SystemParams& p) {
                               return effective_gain(l, p);
                             });
}

inline TwoBsProblem make_two_bs_problem_from_gains(const SystemParams& params,
                                                   const TaskProfile& task, double gain_a,
                                                   double gain_b, const ServerProfile& server_a,
                                                   const ServerProfile& server_b,
                                                   CsiMode csi = CsiMode::imperfect) {
  TwoBsProblem prob;
  prob.params = params;
  prob.task = task;
  prob.gains = {gain_a, gain_b};
  prob.servers = {server_a, server_b};
  prob.links[0].eff_gain = gain_a;
  prob.links[1].eff_gain = gain_b;
  prob.csi = csi;
  return detail::sorted_problem(prob);
}

struct PowerPair {
  double p1_w = 0.0;
  double p2_w = 0.0;

  double total() const { return p1_w + p2_w; }
};

inline void require_split(double beta1) {
  detail::require(beta1 >= 0.0 && beta1 <= 1.0, "beta1 must lie in [0, 1]");
}

/// Minimal powers meeting both rate constraints with equality at T_max.
inline PowerPair optimal_powers(double beta1, const TwoBsProblem& prob) {
  require_split(beta1);
  const double a = prob.a_exponent();
  PowerPair p;
  p.p2_w = std::expm1(a * (1.0 - beta1) * std::numbers::ln2) / prob.h2();
  p.p1_w = std::expm1(a * beta1 * std::numbers::ln2) * (p.p2_w + 1.0 / prob.h1());
  return p;
}

/// g(beta1): total energy when the powers are the minimal ones. Evaluated in
/// the rearranged form T((2^A - 1)/H2 + (2^{A beta} - 1)(1/H1 - 1/H2)), which
/// equals the offloading bracket of g without the 1/H1 cancellation.
inline double energy_of_split(double beta1, const TwoBsProblem& prob) {
  require_split(beta1);
  const double a = prob.a_exponent();
  const double offload =
      prob.params.t_max_s * (std::expm1(a * std::numbers::ln2) / prob.h2() +
                             std::expm1(a * beta1 * std::numbers::ln2) * prob.inv_gain_gap());
  return offload - prob.compute_gap() * beta1 + prob.compute_energy(1);
}

/// Transmit energy above the all-to-BS2 level, T (2^{A beta} - 1)(1/H1 - 1/H2).
/// The only non-affine part of g.
inline double offload_excess(double beta1, const TwoBsProblem& prob) {
  require_split(beta1);
  const double a = prob.a_exponent();
  return prob.params.t_max_s * std::expm1(a * beta1 * std::numbers::ln2) * prob.inv_gain_gap();
}

/// g(beta1) - g(0), computed without the large compute-energy constant.
inline double energy_delta(double beta1, const TwoBsProblem& prob) {
  return offload_excess(beta1, prob) - prob.compute_gap() * beta1;
}

/// Analytic second derivative (A ln 2)^2 T (1/H1 - 1/H2) 2^{A beta}.
inline double energy_curvature(double beta1, const TwoBsProblem& prob) {
  const double a = prob.a_exponent();
  const double k = a * std::numbers::ln2;
  return k * k * prob.params.t_max_s * prob.inv_gain_gap() * std::exp2(a * beta1);
}

struct Feasibility {
  bool feasible = false;
  /// min(1, beta_hat_max), the largest split meeting p1 + p2 <= P_max.
  double beta1_upper = std::numeric_limits<double>::quiet_NaN();
  /// Unclipped beta_hat_max; +inf when H1 == H2.
  double beta1_max_raw = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// (P_max + 1/H1 - 2^A/H2) / (1/H1 - 1/H2), the argument of log2 in beta_hat_max.
inline double power_cap_ratio(const TwoBsProblem& prob) {
  const double gap = prob.inv_gain_gap();
  if (gap == 0.0) return std::numeric_limits<double>::infinity();
  const double slack = prob.params.p_max_w - (std::exp2(prob.a_exponent()) - 1.0) / prob.h2();
  return 1.0 + slack / gap;
}

inline double log2_ratio_over_a(double ratio, const TwoBsProblem& prob) {
  return std::log2(ratio) / prob.a_exponent();
}

}  // namespace detail

/// The instance is feasible iff sending every bit to BS2 fits the power budget,
/// 2^A <= 1 + H2 P_max.
inline Feasibility feasibility(const TwoBsProblem& prob) {
  prob.validate();
  Feasibility f;
  f.feasible = std::exp2(prob.a_exponent()) <= 1.0 + prob.h2() * prob.params.p_max_w;
  if (!f.feasible) return f;
  if (prob.inv_gain_gap() == 0.0) {
    // Equal gains: p1 + p2 = (2^A - 1)/H for every split.
    f.beta1_max_raw = std::numeric_limits<double>::infinity();
    f.beta1_upper = 1.0;
    return f;
  }
  f.beta1_max_raw = detail::log2_ratio_over_a(detail::power_cap_ratio(prob), prob);
  f.beta1_upper = std::clamp(f.beta1_max_raw, 0.0, 1.0);
  return f;
}

/// D / (T_max A ln2 (1/H1 - 1/H2)), the value 2^{A beta} takes where g' = 0.
/// +inf / -inf / 0 by the sign of D when H1 == H2.
inline double stationary_ratio(const TwoBsProblem& prob) {
  const double d = prob.compute_gap();
  const double gap = prob.inv_gain_gap();
  if (gap == 0.0) {
    if (d > 0.0) return std::numeric_limits<double>::infinity();
    if (d < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  const double a = prob.a_exponent();
  return d / (prob.params.t_max_s * a * std::numbers::ln2 * gap);
}

/// Zero of g'(beta); absent when g is monotone on the whole line.
inline std::optional<double> stationary_split(const TwoBsProblem& prob) {
  if (prob.inv_gain_gap() == 0.0) return std::nullopt;
  const double ratio = stationary_ratio(prob);
  if (!(ratio > 0.0)) return std::nullopt;
  return detail::log2_ratio_over_a(ratio, prob);
}

struct CaseClassification {
  CaseLabel label = CaseLabel::infeasible;
  double beta1 = std::numeric_limits<double>::quiet_NaN();
  /// False when no condition system held and the label came from the candidate argmin.
  bool matched = false;
};

struct TwoBsSolution {
  CaseLabel label = CaseLabel::infeasible;
  double beta1 = std::numeric_limits<double>::quiet_NaN();
  double p1_w = std::numeric_limits<double>::quiet_NaN();
  double p2_w = std::numeric_limits<double>::quiet_NaN();
  double energy_j = std::numeric_limits<double>::quiet_NaN();
  double beta1_upper = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> beta1_stationary;
  /// Split prescribed by the case classifier and whether a condition system matched.
  double classifier_beta1 = std::numeric_limits<double>::quiet_NaN();
  bool classifier_matched = false;

  bool feasible() const { return label != CaseLabel::infeasible; }
};

namespace detail {

/// Argmin of the convex g over {0, beta_hat (if interior), upper}, compared
/// through g - g(0). Ties go to the smaller split.
inline double candidate_argmin(const TwoBsProblem& prob, const Feasibility& feas,
                               const std::optional<double>& stationary) {
  double best = 0.0;
  double best_delta = 0.0;
  auto consider = [&](double beta) {
    const double d = energy_delta(beta, prob);
    if (d < best_delta) {
      best = beta;
      best_delta = d;
    }
  };
  if (stationary && *stationary > 0.0 && *stationary < feas.beta1_upper) consider(*stationary);
  if (feas.beta1_upper > 0.0) consider(feas.beta1_upper);
  return best;
}

inline CaseLabel label_for_split(double beta1, const Feasibility& feas) {
  if (beta1 == 0.0) return CaseLabel::case5_oma_bs2;
  if (beta1 == 1.0) return CaseLabel::case1_oma_bs1;
  if (beta1 == feas.beta1_upper) return CaseLabel::case2_noma_boundary;
  return feas.beta1_upper == 1.0 ? CaseLabel::case3_noma_interior
                                 : CaseLabel::case4_noma_interior;
}

}  // namespace detail

/// Evaluates the five condition systems in order and returns the first match
/// with the split it prescribes. Case 3 and Case 4 prescribe beta_hat.
inline CaseClassification classify_case(const TwoBsProblem& prob) {
  const Feasibility feas = feasibility(prob);
  if (!feas.feasible) return {CaseLabel::infeasible, std::numeric_limits<double>::quiet_NaN(), true};

  const double two_a = std::exp2(prob.a_exponent());
  const double weak_cap = 1.0 + prob.h1() * prob.params.p_max_w;
  const double strong_cap = 1.0 + prob.h2() * prob.params.p_max_w;
  const double x = stationary_ratio(prob);
  const double y = detail::power_cap_ratio(prob);
  const bool weak_fits = two_a <= weak_cap;
  const bool strong_only = weak_cap <= two_a && two_a <= strong_cap;

  if (weak_fits && two_a <= x) return {CaseLabel::case1_oma_bs1, 1.0, true};
  if (strong_only && x >= y) return {CaseLabel::case2_noma_boundary, feas.beta1_upper, true};
  if (weak_fits && 1.0 <= x && x <= two_a)
    return {CaseLabel::case3_noma_interior, detail::log2_ratio_over_a(x, prob), true};
  if (strong_only && 1.0 <= x && x <= y)
    return {CaseLabel::case4_noma_interior, detail::log2_ratio_over_a(x, prob), true};
  if (two_a <= strong_cap && x <= 1.0) return {CaseLabel::case5_oma_bs2, 0.0, true};

  const double beta = detail::candidate_argmin(prob, feas, stationary_split(prob));
  return {detail::label_for_split(beta, feas), beta, false};
}

/// Global minimizer of g over the feasible splits. The candidate argmin is
/// authoritative; the case label comes from classify_case.
inline TwoBsSolution solve(const TwoBsProblem& prob) {
  const Feasibility feas = feasibility(prob);
  TwoBsSolution sol;
  if (!feas.feasible) return sol;

  sol.beta1_upper = feas.beta1_upper;
  sol.beta1_stationary = stationary_split(prob);
  sol.beta1 = detail::candidate_argmin(prob, feas, sol.beta1_stationary);
  const PowerPair p = optimal_powers(sol.beta1, prob);
  sol.p1_w = p.p1_w;
  sol.p2_w = p.p2_w;
  sol.energy_j = energy_of_split(sol.beta1, prob);

  const CaseClassification cls = classify_case(prob);
  sol.label = cls.label;
  sol.classifier_beta1 = cls.beta1;
  sol.classifier_matched = cls.matched;
  return sol;
}

struct EceBreakdown {
  double total = 0.0;         // ECE1 - ECE2
  double offload_part = 0.0;  // T A ln2 (1/H1 - 1/H2) 2^{A beta}, never negative
  double compute_part = 0.0;  // E2c - E1c, constant in beta
};

/// Energy-consumption-efficiency difference between the two links at a split.
/// Negative total means shifting bits toward BS1 lowers the energy.
inline EceBreakdown ece_difference(double beta1, const TwoBsProblem& prob) {
  require_split(beta1);
  const double a = prob.a_exponent();
  EceBreakdown e;
  e.offload_part = prob.params.t_max_s * a * std::numbers::ln2 * prob.inv_gain_gap() *
                   std::exp2(a * beta1);
  e.compute_part = prob.compute_gap();
  e.total = e.offload_part - e.compute_part;
  return e;
}

}  // namespace nomamec
