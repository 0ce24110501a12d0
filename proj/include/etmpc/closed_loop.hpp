#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "etmpc/dataset.hpp"
#include "etmpc/gp.hpp"
#include "etmpc/ocp.hpp"
#include "etmpc/plants.hpp"
#include "etmpc/symbolic.hpp"
#include "etmpc/trigger.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

struct LoopConfig {
  Hyperparams hp;
  SymbolicParams sym;

  int horizon0 = 30;
  int step_cap = 40;
  int iterations = 10;
  std::uint64_t seed = 0;
  double sigma_margin = 1e-3;

  Vec x_init_lo, x_init_hi;
  std::function<double(const Vec&, const Vec&)> stage_cost;

  long ocp_budget = 20000;
  int ocp_population = 200;
  int ocp_elites = 20;

  // Collect a stepped sample into the pending set only when its trigger
  // condition fired (simulation rule); switch on for unconditional
  // collection of every stepped sample.
  bool unconditional_collect = false;
  // End the whole run at the first phase that reaches the safe set.
  bool stop_on_safe = false;
  // States with any coordinate beyond this magnitude count as diverged.
  double divergence_bound = 1e3;
  // Optional generator of approach candidates (model, state, horizon) ->
  // input sequences; they seed the first solve of each execution phase as
  // warm starts. Later solves reuse the shifted previous solution.
  std::function<std::vector<std::vector<Vec>>(const GpModel&, const Vec&, int)> approach_plans;
  // When positive, the safe-set synthesis model is fitted on at most this
  // many samples whose state lies inside the specification box, instead of
  // the full dataset. Any dataset yields a valid enclosure of the dynamics,
  // and samples far outside the box barely inform it, so this keeps the
  // synthesis cost flat while the run keeps collecting data.
  int synth_data_cap = 0;
};

enum class PhaseStatus { ReachedSafe, StepCap, InfeasibleSchedule, OcpInfeasible, Diverged };

const char* to_string(PhaseStatus s);

struct StepLog {
  int iteration = 0;
  long t = 0;
  Vec x;
  Vec u;
  char mode = 'M';  // M = predictive control, S = safety controller
  bool trigger = false;
};

struct PhaseReport {
  PhaseStatus status = PhaseStatus::StepCap;
  int steps = 0;
  long triggers = 0;       // event instants t_k with k >= 1
  long new_points = 0;     // samples merged into the dataset
  long ocp_solves = 0;
  double solve_ms = 0.0;   // cumulative OCP + threshold-recursion time
  int final_horizon = 0;
  Vec final_state;
  bool horizon_one_safe_ok = true;  // x in X_S whenever H_{k+1} = 1
  bool recursive_feasible = true;   // every re-solve after a trigger feasible
};

struct IterationSummary {
  int iteration = 0;
  long triggers = 0;
  long dataset_size = 0;
  double solve_ms = 0.0;
  std::string status;
};

struct RunSummary {
  std::vector<IterationSummary> iterations;
  std::vector<StepLog> trajectory;
  bool reached_safe = false;
  std::string abort_reason;  // nonempty when synthesis failed mid-run
};

// Event-triggered MPC phase from x0 (Algorithm-style inner loop): solve,
// build thresholds, step until a trigger or the cap, shrink the horizon,
// repeat; an infeasible threshold schedule applies the whole input sequence
// and collects every sample. Appends collected samples to data.
PhaseReport execution_phase(const Plant& plant, const GpModel& model,
                            const SafeSynthesis& synthesis, const LoopConfig& config,
                            const Vec& x0, int iteration, std::mt19937_64& rng,
                            Dataset& data, std::vector<StepLog>* log);

// Safety-controller rollout from a state in the safe set; throws when the
// state ever leaves the safe set or fails to stay in the terminal set after
// the first step.
std::vector<StepLog> dual_mode_run(const Plant& plant, const SafeSynthesis& synthesis,
                                   const Vec& x0, int steps, std::mt19937_64& rng,
                                   int iteration = 0, long t_start = 0);

// Full iterative task: alternate model refit + synthesis with execution
// phases, logging per-iteration statistics.
RunSummary iterative_task(const Plant& plant, Dataset data, const LoopConfig& config);

}  // namespace etmpc
