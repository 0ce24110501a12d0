#include "etmpc/trigger.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace etmpc {

namespace {

Vec contraction_map(const Hyperparams& hp, const Vec& radii) {
  Vec out(hp.n_x);
  for (int i = 0; i < hp.n_x; ++i) {
    const double a2 = 2.0 * hp.alpha(i) * hp.alpha(i);
    const double r2 = radii(i) * radii(i);
    if (r2 >= a2)
      throw std::invalid_argument("contraction map: radius >= sqrt(2) alpha");
    out(i) = std::sqrt(2.0 * std::log(a2 / (a2 - r2)));
  }
  return out;
}

}  // namespace

Vec c_terminal(const Hyperparams& hp, const Vec& gamma) { return contraction_map(hp, gamma); }

Vec c_step(const Hyperparams& hp, const Vec& psi_next) { return contraction_map(hp, psi_next); }

StepSolution solve_gp_step(const Hyperparams& hp, const Vec& delta_hat, const Vec& c_next,
                           double sigma_margin) {
  const int n = hp.n_x;
  StepSolution sol;

  // Substituting q = psi^2 linearizes the norm constraints: row i of A has
  // entries b_l^2 / lambda_{i,l}, and A q <= c_next^2 componentwise.
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) A(i, l) = hp.b(l) * hp.b(l) / hp.lambda(i, l);
  Vec rhs = c_next.array().square();

  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    const double l = delta_hat(i) / hp.b(i);
    const double h = std::sqrt(2.0) * hp.alpha(i) - sigma_margin;
    if (l > h) return sol;  // box empty: even zero deviation is intolerable
    lo(i) = l * l;
    hi(i) = h * h;
  }

  const Vec slack0 = rhs - A * lo;
  for (int i = 0; i < n; ++i)
    if (slack0(i) < -1e-12 * std::max(1.0, rhs(i))) return sol;
  sol.feasible = true;

  // Norm constraint active at the lower corner: with all-positive
  // coefficients nothing can increase, the corner is the optimum.
  double min_rel_slack = 1e100;
  for (int i = 0; i < n; ++i)
    min_rel_slack = std::min(min_rel_slack, slack0(i) / std::max(1.0, rhs(i)));
  if (min_rel_slack < 1e-12) {
    sol.psi = lo.array().sqrt();
    return sol;
  }

  Vec hi_adj = hi;
  for (int i = 0; i < n; ++i) hi_adj(i) = std::max(hi(i), lo(i) + 1e-12);

  // Strictly interior start: walk from the lower corner toward the box
  // midpoint until every constraint has slack.
  Vec q = (lo + hi_adj) * 0.5;
  double theta = 1.0;
  while (true) {
    Vec cand = lo + theta * (q - lo);
    if (((rhs - A * cand).array() > 0.0).all()) {
      q = cand;
      break;
    }
    theta *= 0.5;
    if (theta < 1e-14) {
      sol.psi = lo.array().sqrt();
      return sol;
    }
  }

  // Log-barrier Newton on the concave objective 1/2 sum log q.
  const int m_constraints = 3 * n;
  double t = 1.0;
  auto barrier_value = [&](const Vec& p, double tt) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += tt * 0.5 * std::log(p(i));
    const Vec r = rhs - A * p;
    for (int i = 0; i < n; ++i) {
      if (r(i) <= 0.0 || p(i) - lo(i) <= 0.0 || hi_adj(i) - p(i) <= 0.0)
        return -std::numeric_limits<double>::infinity();
      v += std::log(r(i)) + std::log(p(i) - lo(i)) + std::log(hi_adj(i) - p(i));
    }
    return v;
  };

  while (m_constraints / t > 1e-11) {
    for (int iter = 0; iter < 80; ++iter) {
      const Vec r = rhs - A * q;
      Vec g(n);
      Mat H = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        g(i) = t * 0.5 / q(i) + 1.0 / (q(i) - lo(i)) - 1.0 / (hi_adj(i) - q(i));
        H(i, i) = -t * 0.5 / (q(i) * q(i)) - 1.0 / ((q(i) - lo(i)) * (q(i) - lo(i))) -
                  1.0 / ((hi_adj(i) - q(i)) * (hi_adj(i) - q(i)));
      }
      for (int j = 0; j < n; ++j) {
        g -= A.row(j).transpose() / r(j);
        H -= A.row(j).transpose() * A.row(j) / (r(j) * r(j));
      }
      const Vec step = (-H).ldlt().solve(g);
      const double decrement = g.dot(step);
      if (decrement < 1e-14) break;
      double alpha = 1.0;
      const double v0 = barrier_value(q, t);
      while (alpha > 1e-14 && barrier_value(q + alpha * step, t) < v0 + 1e-4 * alpha * decrement)
        alpha *= 0.5;
      if (alpha <= 1e-14) break;
      q += alpha * step;
    }
    t *= 10.0;
  }

  sol.psi = q.array().sqrt();
  return sol;
}

Vec TriggerSchedule::threshold(int j) const {
  if (j >= horizon()) return Vec::Constant(psi.cols(), xi_terminal);
  return xi.row(j).transpose();
}

TriggerSchedule build_schedule(const GpModel& model, const std::vector<Vec>& xhat,
                               const std::vector<Vec>& u, const Vec& gamma,
                               double sigma_margin) {
  const Hyperparams& hp = model.hyperparams();
  const int H = static_cast<int>(u.size());
  if (static_cast<int>(xhat.size()) != H + 1)
    throw std::invalid_argument("build_schedule: xhat must have H+1 states");

  TriggerSchedule sched;
  sched.psi = Mat::Zero(H, hp.n_x);
  sched.xi = Mat::Zero(H, hp.n_x);
  sched.c = Mat::Zero(H, hp.n_x);

  Vec c_next = c_terminal(hp, gamma);
  for (int j = H - 1; j >= 0; --j) {
    const Vec delta_hat = delta(model, xhat[j], u[j]);
    const StepSolution step = solve_gp_step(hp, delta_hat, c_next, sigma_margin);
    if (!step.feasible) return sched;  // feasible stays false
    sched.psi.row(j) = step.psi.transpose();
    sched.c.row(j) = c_next.transpose();
    for (int i = 0; i < hp.n_x; ++i)
      sched.xi(j, i) = step.psi(i) - delta_hat(i) / hp.b(i);
    if (j > 0) c_next = c_step(hp, step.psi);
  }
  sched.feasible = true;
  return sched;
}

bool check_trigger(const MetricContext& ctx, const Vec& x, const Vec& xhat_j,
                   const Vec& threshold) {
  for (int i = 0; i < ctx.n_x; ++i)
    if (kernel_metric(ctx, x, xhat_j, i) > threshold(i)) return true;
  return false;
}

}  // namespace etmpc
