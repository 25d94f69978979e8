#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "nomamec/association.hpp"
#include "nomamec/channel.hpp"
#include "nomamec/error.hpp"
#include "nomamec/params.hpp"
#include "nomamec/rng.hpp"

namespace nomamec {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline Point uniform_in_disc(Rng& rng, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return {r * std::cos(theta), r * std::sin(theta)};
}

/// Users and base stations dropped uniformly in one disc, with a minimum
/// user-to-BS distance enforced by rejection.
struct Deployment {
  double cell_radius_m = 500.0;
  double min_distance_m = 40.0;
  std::size_t max_rejections = 10000;
  double err_var = 0.1;

  void validate() const {
    detail::require(cell_radius_m > 0.0, "cell_radius_m must be positive");
    detail::require(min_distance_m > 0.0, "min_distance_m must be positive");
    detail::require(min_distance_m < 2.0 * cell_radius_m, "min_distance_m exceeds the disc");
    detail::require(err_var >= 0.0, "err_var must be nonnegative");
  }
};

struct Placement {
  std::vector<Point> base_stations;
  std::vector<Point> users;
  /// distances[n][m] from user n to BS m.
  std::vector<std::vector<double>> distances;
};

/// Places `n_bs` base stations, then each user by rejection until it is at
/// least min_distance_m from every BS. Throws after max_rejections tries for
/// any single user.
inline Placement place(Rng& rng, const Deployment& dep, std::size_t n_users, std::size_t n_bs) {
  dep.validate();
  Placement pl;
  for (std::size_t m = 0; m < n_bs; ++m) pl.base_stations.push_back(uniform_in_disc(rng, dep.cell_radius_m));
  for (std::size_t n = 0; n < n_users; ++n) {
    std::size_t rejections = 0;
    for (;;) {
      const Point u = uniform_in_disc(rng, dep.cell_radius_m);
      std::vector<double> d(n_bs);
      bool ok = true;
      for (std::size_t m = 0; m < n_bs; ++m) {
        d[m] = distance(u, pl.base_stations[m]);
        ok = ok && d[m] >= dep.min_distance_m;
      }
      if (ok) {
        pl.users.push_back(u);
        pl.distances.push_back(std::move(d));
        break;
      }
      if (++rejections >= dep.max_rejections)
        throw ParameterError("placement exceeded max_rejections for the minimum distance");
    }
  }
  return pl;
}

/// Draws one channel estimate per (user, BS) of a placement.
inline std::vector<std::vector<LinkEstimate>> draw_links(Rng& rng, const Placement& pl,
                                                         double err_var,
                                                         const SystemParams& params) {
  std::vector<std::vector<LinkEstimate>> links(pl.users.size());
  for (std::size_t n = 0; n < pl.users.size(); ++n) {
    for (double d : pl.distances[n]) {
      const ChannelSample s = sample_channel(rng, d, err_var, params);
      links[n].push_back({d, s.est_small_scale, err_var, 0.0});
    }
  }
  return links;
}

/// Random multi-user scenario; BS m gets servers[m].
inline Scenario random_scenario(Rng& rng, const Deployment& dep, const SystemParams& params,
                                const std::vector<TaskProfile>& tasks,
                                const std::vector<ServerProfile>& servers) {
  const Placement pl = place(rng, dep, tasks.size(), servers.size());
  Scenario sc;
  sc.params = params;
  sc.tasks = tasks;
  sc.servers = servers;
  sc.links = draw_links(rng, pl, dep.err_var, params);
  return sc;
}

}  // namespace nomamec
