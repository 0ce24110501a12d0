#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "etmpc/gp.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

struct OCPProblem {
  Vec x0;
  int horizon = 1;
  Vec input_lo, input_hi;
  std::function<double(const Vec&, const Vec&)> stage_cost;
  std::function<bool(const Vec&)> terminal;
  // Optional distance-to-terminal score guiding infeasible candidates toward
  // the terminal set; smaller is closer. Zero function when absent.
  std::function<double(const Vec&)> terminal_guidance;
};

struct OCPSolverOptions {
  long max_rollouts = 20000;
  std::uint64_t seed = 0;
  int population = 200;
  int elites = 20;
};

struct OCPSolution {
  bool feasible = false;
  std::vector<Vec> u;     // H inputs
  std::vector<Vec> xhat;  // H+1 mean-predicted states, xhat[0] = x0
  double cost = 0.0;
  long rollouts_used = 0;
};

// Mean-model propagation: H inputs produce H+1 states.
std::vector<Vec> rollout(const GpModel& model, const Vec& x0, const std::vector<Vec>& inputs);

// Sampling-based solve: every warm start is evaluated first and the best one
// seeds the search mean, a cross-entropy search explores toward terminal
// feasibility, and a coordinate-descent pass refines the best feasible
// candidate. Deterministic for a fixed options.seed.
OCPSolution solve_ocp(const GpModel& model, const OCPProblem& problem,
                      const OCPSolverOptions& options,
                      const std::vector<std::vector<Vec>>& warm_starts = {});

}  // namespace etmpc
