#include "etmpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace etmpc {

std::vector<Vec> rollout(const GpModel& model, const Vec& x0, const std::vector<Vec>& inputs) {
  std::vector<Vec> states;
  states.reserve(inputs.size() + 1);
  states.push_back(x0);
  for (const Vec& u : inputs) states.push_back(model.predict_mean(states.back(), u));
  return states;
}

namespace {

struct Candidate {
  double score = std::numeric_limits<double>::infinity();
  double cost = std::numeric_limits<double>::infinity();
  bool feasible = false;
  std::vector<Vec> u;
  std::vector<Vec> xhat;
};

constexpr double kInfeasiblePenalty = 1e9;

}  // namespace

OCPSolution solve_ocp(const GpModel& model, const OCPProblem& problem,
                      const OCPSolverOptions& options,
                      const std::vector<std::vector<Vec>>& warm_starts) {
  const int H = problem.horizon;
  const int nu = static_cast<int>(problem.input_lo.size());
  if (H < 1) throw std::invalid_argument("solve_ocp: horizon must be >= 1");

  long rollouts = 0;
  auto clamp_u = [&](Vec u) {
    for (int l = 0; l < nu; ++l) u(l) = std::clamp(u(l), problem.input_lo(l), problem.input_hi(l));
    return u;
  };

  auto evaluate = [&](const std::vector<Vec>& u) {
    Candidate c;
    c.u = u;
    c.xhat = rollout(model, problem.x0, u);
    ++rollouts;
    c.cost = 0.0;
    for (int j = 0; j < H; ++j) c.cost += problem.stage_cost(c.xhat[j], u[j]);
    c.feasible = problem.terminal(c.xhat[H]);
    if (c.feasible) {
      c.score = c.cost;
    } else {
      const double guide =
          problem.terminal_guidance ? problem.terminal_guidance(c.xhat[H]) : 0.0;
      c.score = kInfeasiblePenalty + guide;
    }
    return c;
  };

  Candidate best;
  auto consider = [&](const Candidate& c) {
    if (c.score < best.score) best = c;
  };

  Candidate best_warm;
  for (const std::vector<Vec>& w : warm_starts) {
    std::vector<Vec> u = w;
    if (static_cast<int>(u.size()) != H)
      throw std::invalid_argument("solve_ocp: warm start length mismatch");
    for (Vec& ui : u) ui = clamp_u(ui);
    const Candidate c = evaluate(u);
    consider(c);
    if (c.score < best_warm.score) best_warm = c;
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Cross-entropy search over flattened input sequences, seeded by the best
  // warm start when one was given.
  const int dim = H * nu;
  Vec mean(dim), stddev(dim);
  for (int j = 0; j < H; ++j)
    for (int l = 0; l < nu; ++l) {
      const int k = j * nu + l;
      mean(k) = best_warm.u.empty()
                    ? 0.5 * (problem.input_lo(l) + problem.input_hi(l))
                    : best_warm.u[j](l);
      stddev(k) = 0.5 * (problem.input_hi(l) - problem.input_lo(l));
    }

  const int pop = std::max(options.population, 2 * options.elites);
  const long cem_budget = options.max_rollouts * 3 / 4;
  std::vector<Candidate> batch(pop);
  std::vector<int> order(pop);
  while (rollouts + pop <= cem_budget) {
    for (int p = 0; p < pop; ++p) {
      std::vector<Vec> u(H, Vec(nu));
      for (int j = 0; j < H; ++j)
        for (int l = 0; l < nu; ++l) {
          const int k = j * nu + l;
          u[j](l) = std::clamp(mean(k) + stddev(k) * gauss(rng), problem.input_lo(l),
                               problem.input_hi(l));
        }
      batch[p] = evaluate(u);
      consider(batch[p]);
    }
    for (int p = 0; p < pop; ++p) order[p] = p;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return batch[a].score < batch[b].score; });
    Vec new_mean = Vec::Zero(dim), new_var = Vec::Zero(dim);
    for (int e = 0; e < options.elites; ++e) {
      const Candidate& c = batch[order[e]];
      for (int j = 0; j < H; ++j)
        for (int l = 0; l < nu; ++l) new_mean(j * nu + l) += c.u[j](l);
    }
    new_mean /= options.elites;
    for (int e = 0; e < options.elites; ++e) {
      const Candidate& c = batch[order[e]];
      for (int j = 0; j < H; ++j)
        for (int l = 0; l < nu; ++l) {
          const double d = c.u[j](l) - new_mean(j * nu + l);
          new_var(j * nu + l) += d * d;
        }
    }
    mean = new_mean;
    for (int k = 0; k < dim; ++k)
      stddev(k) = std::max(std::sqrt(new_var(k) / options.elites), 1e-4);
  }

  // Coordinate-descent refinement on the best feasible candidate, accepting
  // only terminal-feasible improvements.
  if (best.feasible) {
    Vec step(nu);
    for (int l = 0; l < nu; ++l) step(l) = 0.25 * (problem.input_hi(l) - problem.input_lo(l));
    while (step.maxCoeff() > 1e-6 && rollouts + 2 <= options.max_rollouts) {
      bool improved = false;
      for (int j = 0; j < H && rollouts + 2 <= options.max_rollouts; ++j) {
        for (int l = 0; l < nu && rollouts + 2 <= options.max_rollouts; ++l) {
          for (const double sgn : {+1.0, -1.0}) {
            std::vector<Vec> u = best.u;
            u[j](l) = std::clamp(u[j](l) + sgn * step(l), problem.input_lo(l),
                                 problem.input_hi(l));
            const Candidate c = evaluate(u);
            if (c.feasible && c.cost < best.cost - 1e-12) {
              best = c;
              improved = true;
              break;
            }
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }

  OCPSolution sol;
  sol.rollouts_used = rollouts;
  if (best.u.empty()) return sol;
  sol.feasible = best.feasible;
  sol.u = best.u;
  sol.xhat = best.xhat;
  sol.cost = best.cost;
  return sol;
}

}  // namespace etmpc
