// Solves one user offloading to two base stations and prints the split.

#include <cstdio>

#include "nomamec/nomamec.hpp"

int main() {
  using namespace nomamec;

  SystemParams params;
  params.t_max_s = 0.01;
  params.p_max_w = 0.1;
  const TaskProfile task{3.2e6, 1e3};

  // Estimated links: distance, |h_hat|^2, error variance.
  const LinkEstimate near{80.0, 0.9, 0.1, 0.0};
  const LinkEstimate far{150.0, 1.4, 0.1, 0.0};
  const ServerProfile slow{0.8e-28, 0.8e9};
  const ServerProfile fast{1.2e-28, 1e9};

  const TwoBsProblem prob = make_two_bs_problem(params, task, {near, far}, {slow, fast});
  const TwoBsSolution sol = solve(prob);
  if (!sol.feasible()) {
    std::puts("infeasible: the stronger link cannot carry the task within the power budget");
    return 1;
  }

  std::printf("H1 %.4g  H2 %.4g  (BS %zu is the weaker link)\n", prob.h1(), prob.h2(),
              prob.source[0]);
  std::printf("%.*s\n", static_cast<int>(to_string(sol.label).size()), to_string(sol.label).data());
  std::printf("beta1 %.6f  p1 %.4g W  p2 %.4g W  energy %.6g J\n", sol.beta1, sol.p1_w, sol.p2_w,
              sol.energy_j);

  const EceBreakdown ece = ece_difference(sol.beta1, prob);
  std::printf("ECE difference at the optimum %.4g J\n", ece.total);
  return 0;
}
