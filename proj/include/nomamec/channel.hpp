#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>

#include "nomamec/error.hpp"
#include "nomamec/params.hpp"
#include "nomamec/rng.hpp"

namespace nomamec {

/// Estimated state of one user-to-BS link. `est_gain` is the squared magnitude
/// of the small-scale estimate; path loss is known exactly and kept apart in
/// `distance_m`. `eff_gain` is filled by effective_gain().
struct LinkEstimate {
  double distance_m = 0.0;
  double est_gain = 0.0;
  double err_var = 0.0;
  double eff_gain = 0.0;

  bool perfect_csi() const { return err_var == 0.0; }
};

enum class CsiMode { imperfect, perfect };

struct ChannelSample {
  double true_gain = 0.0;        // |g|^2 including path loss
  double est_gain = 0.0;         // |g_hat|^2 including path loss
  double est_small_scale = 0.0;  // |h_hat|^2, the LinkEstimate::est_gain convention
};

inline double path_loss(double distance_m, const SystemParams& params) {
  return std::pow(distance_m, params.path_loss_exp);
}

/// Draws h ~ CN(0,1) and e ~ CN(0, err_var), returns |h|^2 and |h - e|^2
/// scaled by d^-alpha.
inline ChannelSample sample_channel(Rng& rng, double distance_m, double err_var,
                                    const SystemParams& params) {
  detail::require(distance_m > 0.0, "distance_m must be positive");
  detail::require(err_var >= 0.0, "err_var must be nonnegative");
  const std::complex<double> h = draw_cn(rng, 1.0);
  const std::complex<double> e = draw_cn(rng, 1.0) * std::sqrt(err_var);
  const std::complex<double> h_hat = h - e;
  const double pl = path_loss(distance_m, params);
  ChannelSample s;
  s.true_gain = std::norm(h) / pl;
  s.est_gain = std::norm(h_hat) / pl;
  s.est_small_scale = std::norm(h_hat);
  return s;
}

inline ChannelSample sample_channel(std::uint64_t seed, double distance_m, double err_var,
                                    const SystemParams& params) {
  Rng rng(seed);
  return sample_channel(rng, distance_m, err_var, params);
}

/// Ratio of the non-centrality parameter to the two degrees of freedom of the
/// true normalized gain, lambda^2 / 2 = |h_hat|^2 / err_var. The central
/// chi-square surrogate is accurate when this is at most 0.2.
inline double lambda_half(const LinkEstimate& link) {
  if (link.err_var == 0.0) return std::numeric_limits<double>::infinity();
  return link.est_gain / link.err_var;
}

inline void validate_link(const LinkEstimate& link) {
  detail::require(link.distance_m > 0.0, "link distance_m must be positive");
  detail::require(link.est_gain >= 0.0, "link est_gain must be nonnegative");
  detail::require(link.err_var >= 0.0, "link err_var must be nonnegative");
}

/// Deterministic gain H such that Pr[G < H | estimate] = outage_eps under the
/// exponential surrogate for the non-central chi-square law of the true gain:
///
///   H = -ln(1 - eps) * err_var * (1 + lambda^2/2) / (sigma_z^2 * d^alpha)
///
/// With err_var == 0 the estimate is exact and the normalized gain
/// |h_hat|^2 / (sigma_z^2 d^alpha) is returned instead.
inline double effective_gain(const LinkEstimate& link, const SystemParams& params) {
  validate_link(link);
  detail::require(params.outage_eps > 0.0 && params.outage_eps < 1.0,
                  "outage_eps must lie in (0, 1)");
  const double scale = params.noise_power() * path_loss(link.distance_m, params);
  if (link.perfect_csi()) {
    detail::require(link.est_gain > 0.0, "perfect-CSI link needs a positive est_gain");
    return link.est_gain / scale;
  }
  const double quantile = -std::log1p(-params.outage_eps);
  return quantile * link.err_var * (1.0 + lambda_half(link)) / scale;
}

inline LinkEstimate with_effective_gain(LinkEstimate link, const SystemParams& params) {
  link.eff_gain = effective_gain(link, params);
  return link;
}

/// Outage-discounted rate (1 - eps) B log2(1 + H p / (1 + H sum_interf)).
/// In perfect-CSI mode the discount is not applied.
inline double effective_rate(double p_self, double p_interf_sum, double eff_gain,
                             const SystemParams& params, CsiMode mode = CsiMode::imperfect) {
  detail::require(p_self >= 0.0 && p_interf_sum >= 0.0, "powers must be nonnegative");
  detail::require(eff_gain > 0.0, "eff_gain must be positive");
  const double sinr = eff_gain * p_self / (1.0 + eff_gain * p_interf_sum);
  const double discount = mode == CsiMode::perfect ? 1.0 : 1.0 - params.outage_eps;
  return discount * params.bandwidth_hz * std::log1p(sinr) / std::numbers::ln2;
}

/// Undiscounted target rate B log2(1 + H p / (1 + H sum_interf)); the rate the
/// link is driven at, whose outage probability is eps.
inline double outage_target_rate(double p_self, double p_interf_sum, double eff_gain,
                                 const SystemParams& params) {
  return effective_rate(p_self, p_interf_sum, eff_gain, params, CsiMode::perfect);
}

/// Instantaneous achievable rate with the true normalized gain G.
inline double achievable_rate(double normalized_gain, double p_self, double p_interf_sum,
                              double bandwidth_hz) {
  const double sinr = normalized_gain * p_self / (normalized_gain * p_interf_sum + 1.0);
  return bandwidth_hz * std::log2(1.0 + sinr);
}

/// Fraction of `n_trials` channel draws g = g_hat + e, e ~ CN(0, err_var), for
/// which the instantaneous rate falls below `target_rate`.
inline double empirical_outage(const LinkEstimate& link, const SystemParams& params,
                               double p_self, double p_interf_sum, double target_rate,
                               std::size_t n_trials, std::uint64_t seed) {
  validate_link(link);
  detail::require(n_trials >= 10000, "empirical_outage needs at least 1e4 trials");
  detail::require(p_self >= 0.0 && p_interf_sum >= 0.0, "powers must be nonnegative");
  const double scale = params.noise_power() * path_loss(link.distance_m, params);
  const double h_hat = std::sqrt(link.est_gain);  // phase is irrelevant to |h|^2
  Rng rng(seed);
  std::size_t outages = 0;
  for (std::size_t t = 0; t < n_trials; ++t) {
    const std::complex<double> h = h_hat + draw_cn(rng, link.err_var);
    const double g = std::norm(h) / scale;
    if (achievable_rate(g, p_self, p_interf_sum, params.bandwidth_hz) < target_rate) ++outages;
  }
  return static_cast<double>(outages) / static_cast<double>(n_trials);
}

}  // namespace nomamec
