#include "etmpc/closed_loop.hpp"

#include <chrono>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace etmpc {

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// First synth_data_cap samples with state inside the specification box (the
// full dataset when the cap is off). The prefix rule keeps the subset stable
// across iterations, so synthesis reruns only when in-box data arrives.
Dataset synthesis_subset(const Dataset& data, const LoopConfig& config) {
  if (config.synth_data_cap <= 0) return data;
  const int n_x = data.n_x();
  Dataset out(n_x, data.n_u());
  for (int r = 0; r < data.size() && out.size() < config.synth_data_cap; ++r) {
    const Vec x = data.inputs().row(r).head(n_x);
    bool inside = true;
    for (int i = 0; i < n_x && inside; ++i)
      inside = x(i) >= config.sym.spec_lo(i) && x(i) <= config.sym.spec_hi(i);
    if (inside)
      out.append(x, data.inputs().row(r).tail(data.n_u()),
                 data.targets().row(r).transpose());
  }
  return out;
}

}  // namespace

const char* to_string(PhaseStatus s) {
  switch (s) {
    case PhaseStatus::ReachedSafe: return "reached_safe";
    case PhaseStatus::StepCap: return "step_cap";
    case PhaseStatus::InfeasibleSchedule: return "infeasible_schedule";
    case PhaseStatus::OcpInfeasible: return "ocp_infeasible";
    case PhaseStatus::Diverged: return "diverged";
  }
  return "unknown";
}

PhaseReport execution_phase(const Plant& plant, const GpModel& model,
                            const SafeSynthesis& synthesis, const LoopConfig& config,
                            const Vec& x0, int iteration, std::mt19937_64& rng,
                            Dataset& data, std::vector<StepLog>* log) {
  const MetricContext ctx = MetricContext::from_hyperparams(config.hp);
  PhaseReport rep;
  Dataset pending(config.hp.n_x, config.hp.n_u);

  Vec x = x0;
  int H = config.horizon0;
  long k = 0;
  std::vector<std::vector<Vec>> warm;

  auto log_step = [&](const Vec& xs, const Vec& u, bool fired) {
    if (!log) return;
    StepLog row;
    row.iteration = iteration;
    row.t = rep.steps;
    row.x = xs;
    row.u = u;
    row.mode = 'M';
    row.trigger = fired;
    log->push_back(row);
  };

  while (true) {
    if (synthesis.in_safe_set(x)) {
      rep.status = PhaseStatus::ReachedSafe;
      break;
    }
    if (rep.steps >= config.step_cap) {
      rep.status = PhaseStatus::StepCap;
      break;
    }

    // Candidate seeds for this solve: the shifted previous solution (after a
    // trigger) plus fresh approach plans from the current state.
    if (config.approach_plans) {
      auto fresh = config.approach_plans(model, x, H);
      warm.insert(warm.end(), std::make_move_iterator(fresh.begin()),
                  std::make_move_iterator(fresh.end()));
    }

    OCPProblem prob;
    prob.x0 = x;
    prob.horizon = H;
    prob.input_lo = config.sym.input_lo;
    prob.input_hi = config.sym.input_hi;
    prob.stage_cost = config.stage_cost;
    prob.terminal = [&](const Vec& xt) { return synthesis.in_terminal_set(xt); };
    prob.terminal_guidance = [&](const Vec& xt) { return synthesis.terminal_distance(xt); };

    OCPSolverOptions opts;
    opts.max_rollouts = config.ocp_budget;
    opts.population = config.ocp_population;
    opts.elites = config.ocp_elites;
    opts.seed = mix_seed(config.seed, static_cast<std::uint64_t>(iteration), k);

    const auto t0 = std::chrono::steady_clock::now();
    const OCPSolution sol = solve_ocp(model, prob, opts, warm);
    ++rep.ocp_solves;
    if (!sol.feasible) {
      rep.solve_ms += ms_since(t0);
      rep.status = PhaseStatus::OcpInfeasible;
      if (k > 0) rep.recursive_feasible = false;
      break;
    }
    const TriggerSchedule sched =
        build_schedule(model, sol.xhat, sol.u, synthesis.gamma(), config.sigma_margin);
    rep.solve_ms += ms_since(t0);

    if (!sched.feasible) {
      // Apply the whole sequence and keep every sample.
      for (int j = 0; j < H && rep.steps < config.step_cap; ++j) {
        const Vec xn = plant.step(x, sol.u[j], rng);
        ++rep.steps;
        pending.append(x, sol.u[j], xn);
        log_step(xn, sol.u[j], false);
        x = xn;
      }
      rep.status = PhaseStatus::InfeasibleSchedule;
      break;
    }

    bool fired = false;
    bool capped = false;
    int m_k = 0;
    for (int j = 1; j <= H; ++j) {
      const Vec u = sol.u[j - 1];
      const Vec xn = plant.step(x, u, rng);
      ++rep.steps;
      fired = check_trigger(ctx, xn, sol.xhat[j], sched.threshold(j));
      if (fired || config.unconditional_collect) pending.append(x, u, xn);
      log_step(xn, u, fired);
      x = xn;
      if (x.cwiseAbs().maxCoeff() > config.divergence_bound) {
        rep.status = PhaseStatus::Diverged;
        capped = true;
        break;
      }
      if (fired) {
        m_k = j;
        break;
      }
      if (rep.steps >= config.step_cap) {
        capped = true;
        break;
      }
    }
    if (capped) {
      if (rep.status != PhaseStatus::Diverged) rep.status = PhaseStatus::StepCap;
      break;
    }
    // The terminal threshold is negative, so the schedule always fires by
    // j = H; reaching here without a trigger is impossible.
    const int H_old = H;
    H = H_old - (m_k - 1);
    ++k;
    ++rep.triggers;
    if (H == 1 && !synthesis.in_safe_set(x)) rep.horizon_one_safe_ok = false;

    std::vector<Vec> shifted(sol.u.begin() + m_k, sol.u.end());
    if (synthesis.in_safe_set(sol.xhat[H_old]))
      shifted.push_back(synthesis.control(sol.xhat[H_old]));
    else
      shifted.push_back(0.5 * (config.sym.input_lo + config.sym.input_hi));
    warm = {std::move(shifted)};
  }

  rep.new_points = pending.size();
  data.append_all(pending);
  rep.final_horizon = H;
  rep.final_state = x;
  return rep;
}

std::vector<StepLog> dual_mode_run(const Plant& plant, const SafeSynthesis& synthesis,
                                   const Vec& x0, int steps, std::mt19937_64& rng,
                                   int iteration, long t_start) {
  if (!synthesis.in_safe_set(x0))
    throw std::runtime_error("dual_mode_run: start state outside the safe set");
  std::vector<StepLog> out;
  Vec x = x0;
  for (int s = 1; s <= steps; ++s) {
    const Vec u = synthesis.control(x);
    x = plant.step(x, u, rng);
    if (!synthesis.in_safe_set(x))
      throw std::runtime_error("dual_mode_run: safe-set invariance violated");
    if (!synthesis.in_terminal_set(x))
      throw std::runtime_error("dual_mode_run: terminal-set entry/invariance violated");
    StepLog row;
    row.iteration = iteration;
    row.t = t_start + s;
    row.x = x;
    row.u = u;
    row.mode = 'S';
    row.trigger = false;
    out.push_back(row);
  }
  return out;
}

RunSummary iterative_task(const Plant& plant, Dataset data, const LoopConfig& config) {
  RunSummary sum;
  std::optional<GpModel> model;
  SafeSynthesis synthesis;
  int fitted_size = -1;
  int synth_size = -1;
  for (int iter = 1; iter <= config.iterations; ++iter) {
    // Model and safe set depend only on the dataset; rebuild only when the
    // previous iteration actually collected samples. The synthesis subset is
    // a prefix-stable selection, so matching sizes imply matching data.
    if (data.size() != fitted_size) {
      model = GpModel::fit(data, config.hp);
      fitted_size = data.size();
      const Dataset subset = synthesis_subset(data, config);
      if (subset.size() != synth_size) {
        try {
          const GpModel synth_model =
              config.synth_data_cap > 0 ? GpModel::fit(subset, config.hp) : *model;
          synthesis = SafeSynthesis::run(synth_model, config.sym);
        } catch (const std::exception& e) {
          sum.abort_reason = e.what();
          break;
        }
        synth_size = subset.size();
      }
    }
    if (synthesis.empty()) {
      sum.abort_reason = "synthesis produced an empty safe set";
      break;
    }

    std::mt19937_64 rng(mix_seed(config.seed, 0xA11CEull, static_cast<std::uint64_t>(iter)));
    Vec x0(config.hp.n_x);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < config.hp.n_x; ++i)
      x0(i) = config.x_init_lo(i) + (config.x_init_hi(i) - config.x_init_lo(i)) * unit(rng);

    const PhaseReport rep = execution_phase(plant, *model, synthesis, config, x0, iter, rng,
                                            data, &sum.trajectory);

    IterationSummary is;
    is.iteration = iter;
    is.triggers = rep.triggers;
    is.dataset_size = data.size();
    is.solve_ms = rep.solve_ms;
    is.status = to_string(rep.status);
    sum.iterations.push_back(is);

    if (rep.status == PhaseStatus::ReachedSafe) {
      sum.reached_safe = true;
      const int remaining = config.step_cap - rep.steps;
      if (remaining > 0) {
        const auto tail = dual_mode_run(plant, synthesis, rep.final_state, remaining, rng,
                                        iter, rep.steps);
        sum.trajectory.insert(sum.trajectory.end(), tail.begin(), tail.end());
      }
      if (config.stop_on_safe) break;
    }
  }
  return sum;
}

}  // namespace etmpc
