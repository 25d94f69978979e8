#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nomamec/channel.hpp"
#include "nomamec/error.hpp"
#include "nomamec/params.hpp"
#include "nomamec/rng.hpp"
#include "nomamec/two_bs.hpp"

namespace nomamec {

// One-to-one association of users with pairs of base stations. Each user
// offloads to exactly the two BSs of its pair (solved in closed form by
// two_bs.hpp) and users occupy orthogonal resource blocks, so a user's energy
// depends only on its own pair.

struct BsPair {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const BsPair&, const BsPair&) = default;
};

/// All C(m, 2) pairs of distinct BS indices in lexicographic order.
inline std::vector<BsPair> enumerate_pairs(std::size_t m) {
  detail::require(m >= 2, "need at least two base stations");
  std::vector<BsPair> pairs;
  pairs.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.push_back({i, j});
  return pairs;
}

/// Multi-user multi-BS instance. links[n][m] is user n's estimate towards BS m.
struct Scenario {
  SystemParams params;
  std::vector<TaskProfile> tasks;
  std::vector<ServerProfile> servers;
  std::vector<std::vector<LinkEstimate>> links;

  std::size_t users() const { return tasks.size(); }
  std::size_t base_stations() const { return servers.size(); }

  void validate() const {
    params.validate();
    detail::require(base_stations() >= 2, "scenario needs at least two base stations");
    detail::require(links.size() == users(), "links must have one row per user");
    for (const auto& row : links)
      detail::require(row.size() == base_stations(), "links must have one column per BS");
    for (const auto& t : tasks) t.validate();
    for (const auto& s : servers) s.validate();
  }
};

inline TwoBsProblem pair_problem(const Scenario& scenario, std::size_t user, const BsPair& pair) {
  detail::require(user < scenario.users(), "user index out of range");
  detail::require(pair.first < scenario.base_stations() && pair.second < scenario.base_stations() &&
                      pair.first != pair.second,
                  "invalid BS pair");
  TwoBsProblem prob = make_two_bs_problem(
      scenario.params, scenario.tasks[user],
      {scenario.links[user][pair.first], scenario.links[user][pair.second]},
      {scenario.servers[pair.first], scenario.servers[pair.second]});
  // Map role indices back to scenario BS indices.
  for (auto& s : prob.source) s = s == 0 ? pair.first : pair.second;
  return prob;
}

/// Raw closed-form energy of a user on a pair; +inf when infeasible.
inline double match_energy(const Scenario& scenario, std::size_t user, const BsPair& pair) {
  const TwoBsSolution sol = solve(pair_problem(scenario, user, pair));
  return sol.feasible() ? sol.energy_j : std::numeric_limits<double>::infinity();
}

/// Energies of every (user, pair) combination. Infeasible entries are replaced
/// by a finite penalty of 1e6 times the largest feasible energy.
struct CostTable {
  std::size_t users = 0;
  std::size_t pairs = 0;
  std::vector<double> energy;   // row-major [user][pair], penalized
  std::vector<bool> feasible;   // row-major
  double penalty = 0.0;

  double at(std::size_t user, std::size_t pair) const { return energy[user * pairs + pair]; }
  bool feasible_at(std::size_t user, std::size_t pair) const {
    return feasible[user * pairs + pair];
  }

  /// Builds a table from raw energies (+inf or NaN marks infeasible).
  static CostTable from_raw(std::size_t users, std::size_t pairs, std::vector<double> raw) {
    detail::require(raw.size() == users * pairs, "raw energy table has the wrong size");
    CostTable t;
    t.users = users;
    t.pairs = pairs;
    t.feasible.resize(raw.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      t.feasible[i] = std::isfinite(raw[i]);
      if (t.feasible[i]) worst = std::max(worst, raw[i]);
    }
    // With no feasible entry at all, fall back to a 1 J reference.
    t.penalty = 1e6 * (worst > 0.0 ? worst : 1.0);
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (!t.feasible[i]) raw[i] = t.penalty;
    t.energy = std::move(raw);
    return t;
  }
};

inline CostTable build_cost_table(const Scenario& scenario, unsigned threads = 1) {
  scenario.validate();
  const auto pairs = enumerate_pairs(scenario.base_stations());
  const std::size_t n = scenario.users();
  std::vector<double> raw(n * pairs.size());
  parallel_for(raw.size(), threads, [&](std::size_t i) {
    raw[i] = match_energy(scenario, i / pairs.size(), pairs[i % pairs.size()]);
  });
  return CostTable::from_raw(n, pairs.size(), std::move(raw));
}

struct MatchState {
  std::vector<std::size_t> assignment;  // user -> pair index
  std::vector<double> per_match_energy;
  double total_energy = 0.0;
  bool penalized = false;  // some user sits on an infeasible pair

  /// pair -> user, or nullopt for a vacant pair.
  std::vector<std::optional<std::size_t>> pair_owner(std::size_t pairs) const {
    std::vector<std::optional<std::size_t>> owner(pairs);
    for (std::size_t u = 0; u < assignment.size(); ++u) owner.at(assignment[u]) = u;
    return owner;
  }
};

inline MatchState make_state(std::vector<std::size_t> assignment, const CostTable& costs) {
  MatchState s;
  s.assignment = std::move(assignment);
  s.per_match_energy.resize(s.assignment.size());
  for (std::size_t u = 0; u < s.assignment.size(); ++u) {
    s.per_match_energy[u] = costs.at(u, s.assignment[u]);
    s.penalized = s.penalized || !costs.feasible_at(u, s.assignment[u]);
  }
  // Summed in user order so identical assignments give identical totals.
  s.total_energy = std::accumulate(s.per_match_energy.begin(), s.per_match_energy.end(), 0.0);
  return s;
}

/// Checks the bijection conditions: every user on exactly one pair, no pair
/// shared, and the user/pair maps mutually inverse.
inline bool is_valid_matching(const MatchState& s, const CostTable& costs) {
  if (s.assignment.size() != costs.users) return false;
  std::vector<int> seen(costs.pairs, 0);
  for (std::size_t p : s.assignment) {
    if (p >= costs.pairs || seen[p]++ > 0) return false;
  }
  const auto owner = s.pair_owner(costs.pairs);
  for (std::size_t u = 0; u < s.assignment.size(); ++u)
    if (owner[s.assignment[u]] != u) return false;
  return true;
}

/// Minimum combined-energy decrease a swap must achieve.
inline double swap_threshold(const MatchState& s, double rel_tol = 1e-12) {
  return rel_tol * std::abs(s.total_energy);
}

/// True iff exchanging the pairs of u1 and u2 lowers their combined energy by
/// more than the swap threshold.
inline bool is_blocking_pair(const MatchState& state, std::size_t u1, std::size_t u2,
                             const CostTable& costs, double rel_tol = 1e-12) {
  detail::require(u1 != u2, "a swap needs two distinct users");
  detail::require(u1 < state.assignment.size() && u2 < state.assignment.size(),
                  "user index out of range");
  const std::size_t a = state.assignment[u1];
  const std::size_t b = state.assignment[u2];
  const double before = costs.at(u1, a) + costs.at(u2, b);
  const double after = costs.at(u1, b) + costs.at(u2, a);
  return before - after > swap_threshold(state, rel_tol);
}

struct SwapMatchResult {
  MatchState state;
  double initial_energy = 0.0;
  std::size_t swaps = 0;
  std::size_t evaluations = 0;        // blocking-pair tests over the whole run
  std::size_t final_scan_evaluations = 0;
  std::vector<double> energy_trace;  // total energy after init and after each swap
  bool stable = false;
};

/// Swap matching: random initial matching, then scan user pairs (i < j) in
/// order, apply the first blocking swap and restart the scan, until a full
/// scan finds none.
inline SwapMatchResult swap_match(const CostTable& costs, std::uint64_t seed,
                                  double rel_tol = 1e-12) {
  if (costs.users > costs.pairs)
    throw CapacityError("more users (" + std::to_string(costs.users) + ") than BS pairs (" +
                        std::to_string(costs.pairs) + ")");
  std::vector<std::size_t> order(costs.pairs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(costs.users);

  SwapMatchResult r;
  r.state = make_state(std::move(order), costs);
  r.initial_energy = r.state.total_energy;
  r.energy_trace.push_back(r.state.total_energy);

  const std::size_t n = costs.users;
  for (;;) {
    bool swapped = false;
    std::size_t scan_evals = 0;
    for (std::size_t i = 0; i < n && !swapped; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        ++scan_evals;
        if (is_blocking_pair(r.state, i, j, costs, rel_tol)) {
          auto next = r.state.assignment;
          std::swap(next[i], next[j]);
          r.state = make_state(std::move(next), costs);
          r.energy_trace.push_back(r.state.total_energy);
          ++r.swaps;
          swapped = true;
          break;
        }
      }
    }
    r.evaluations += scan_evals;
    if (!swapped) {
      r.final_scan_evaluations = scan_evals;
      break;
    }
  }
  r.stable = true;
  return r;
}

/// Number of blocking user pairs in a matching; zero means exchange-stable.
inline std::size_t count_blocking_pairs(const MatchState& state, const CostTable& costs,
                                        double rel_tol = 1e-12) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < state.assignment.size(); ++i)
    for (std::size_t j = i + 1; j < state.assignment.size(); ++j)
      if (is_blocking_pair(state, i, j, costs, rel_tol)) ++count;
  return count;
}

/// Global optimum over every injective user -> pair map. Oracle only.
inline MatchState exhaustive_match(const CostTable& costs, double max_configs = 1e7) {
  if (costs.users > costs.pairs)
    throw CapacityError("more users than BS pairs");
  double configs = 1.0;
  for (std::size_t k = 0; k < costs.users; ++k) configs *= static_cast<double>(costs.pairs - k);
  if (configs > max_configs)
    throw SizeError("exhaustive matching would enumerate " + std::to_string(configs) +
                    " configurations");

  std::vector<std::size_t> current(costs.users);
  std::vector<std::size_t> best;
  std::vector<bool> used(costs.pairs, false);
  double best_energy = std::numeric_limits<double>::infinity();

  // Depth-first over users; partial sums accumulate in user order.
  auto recurse = [&](auto&& self, std::size_t user, double partial) -> void {
    if (user == costs.users) {
      if (partial < best_energy) {
        best_energy = partial;
        best = current;
      }
      return;
    }
    for (std::size_t p = 0; p < costs.pairs; ++p) {
      if (used[p]) continue;
      used[p] = true;
      current[user] = p;
      self(self, user + 1, partial + costs.at(user, p));
      used[p] = false;
    }
  };
  recurse(recurse, 0, 0.0);
  return make_state(std::move(best), costs);
}

}  // namespace nomamec
