#pragma once

#include <vector>

#include "etmpc/bounds.hpp"
#include "etmpc/gp.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

// c(H) from the terminal contraction radius gamma:
// c_i = sqrt(2 log(2 alpha_i^2 / (2 alpha_i^2 - gamma_i^2))).
Vec c_terminal(const Hyperparams& hp, const Vec& gamma);

// Same map with the next step's psi* in place of gamma.
Vec c_step(const Hyperparams& hp, const Vec& psi_next);

struct StepSolution {
  bool feasible = false;
  Vec psi;  // maximizer of sum log psi_i over the feasible region
};

// Maximize prod psi_i subject to ||b (.) psi||^2_{Lambda_{x,i}^{-1}} <= c_next_i^2
// for every i and delta_hat_i / b_i <= psi_i <= sqrt(2) alpha_i - sigma_margin.
// Infeasible exactly when the box lower corner violates a norm constraint.
StepSolution solve_gp_step(const Hyperparams& hp, const Vec& delta_hat, const Vec& c_next,
                           double sigma_margin);

struct TriggerSchedule {
  bool feasible = false;
  // Rows j = 0..H-1, columns i = 0..n_x-1. xi(H) is the constant -1 terminal
  // row, stored separately as xi_terminal.
  Mat psi;
  Mat xi;
  Mat c;  // row j holds c(j+1)
  double xi_terminal = -1.0;

  int horizon() const { return static_cast<int>(psi.rows()); }
  // Threshold vector at offset j in 0..H (the terminal offset returns -1).
  Vec threshold(int j) const;
};

// Backward recursion from j = H-1 down to 0 along the predicted open-loop
// trajectory xhat (H+1 states) and inputs u (H inputs).
TriggerSchedule build_schedule(const GpModel& model, const std::vector<Vec>& xhat,
                               const std::vector<Vec>& u, const Vec& gamma,
                               double sigma_margin);

// True when the deviation d_i(x, xhat_j) exceeds the threshold in any
// dimension (the event fires).
bool check_trigger(const MetricContext& ctx, const Vec& x, const Vec& xhat_j,
                   const Vec& threshold);

}  // namespace etmpc
