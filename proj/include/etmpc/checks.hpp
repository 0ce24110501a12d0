#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etmpc/types.hpp"

namespace etmpc {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Metric axioms of d_i (identity, symmetry, triangle inequality, sqrt(2)
// alpha bound) on random instances.
SuiteResult check_metric_axioms(std::uint64_t seed, int trials);

// Error-bound containment: random functions with known RKHS norm, noisy
// data, fitted model; the true value must lie in [mu +- beta sigma]
// everywhere.
SuiteResult check_containment(std::uint64_t seed, int n_functions, int n_queries);

// Discrete interior/dilation against a brute-force set oracle, plus the
// complement duality on interior instances. Exact, zero tolerance.
SuiteResult check_duality(std::uint64_t seed, int n_pairs);

// Generic safety-game fixed point against an independent worklist solver on
// random transition systems.
SuiteResult check_game_oracle(std::uint64_t seed, int n_systems, int max_states, int max_inputs);

// Threshold-step program against a zooming grid-search oracle: feasibility
// classification identical, relative objective gap within tol.
SuiteResult check_gp_step_oracle(std::uint64_t seed, int n_instances, double tol);

std::vector<SuiteResult> run_all_checks(std::uint64_t seed);

}  // namespace etmpc
