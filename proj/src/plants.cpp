#include "etmpc/plants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etmpc {

Vec Plant::step(const Vec& x, const Vec& u, std::mt19937_64& rng) const {
  Vec next = f(x, u);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < next.size(); ++i) next(i) += sigma_w(i) * unit(rng);
  return next;
}

Plant unicycle_plant(double dt, double v_r, double omega_r, const Vec& sigma_w) {
  Plant p;
  p.sigma_w = sigma_w;
  p.f = [dt, v_r, omega_r](const Vec& x, const Vec& u) {
    const double xe = x(0), ye = x(1), th = x(2);
    const double v = u(0), om = u(1);
    Vec next(3);
    next(0) = xe + dt * (om * ye - v + v_r * std::cos(th));
    next(1) = ye + dt * (-om * xe + v_r * std::sin(th));
    next(2) = th + dt * (omega_r - om);
    return next;
  };
  return p;
}

Pose world_pose(const Pose& ref, const Vec& error_state) {
  const double theta = ref.theta - error_state(2);
  const double c = std::cos(theta), s = std::sin(theta);
  // error = R(theta) (p_r - p), so p = p_r - R(theta)^T error.
  Pose p;
  p.theta = theta;
  p.x = ref.x - (c * error_state(0) - s * error_state(1));
  p.y = ref.y - (s * error_state(0) + c * error_state(1));
  return p;
}

Pose advance_reference(const Pose& ref, double dt, double v_r, double omega_r) {
  Pose next;
  next.x = ref.x + dt * v_r * std::cos(ref.theta);
  next.y = ref.y + dt * v_r * std::sin(ref.theta);
  next.theta = ref.theta + dt * omega_r;
  return next;
}

Vec unicycle_tracking_law(const Vec& e, double v_r, double omega_r, const Vec& input_lo,
                          const Vec& input_hi) {
  Vec u(2);
  u(0) = v_r * std::cos(e(2)) + e(0);
  u(1) = omega_r + v_r * (e(1) + 2.0 * std::sin(e(2)));
  for (int l = 0; l < 2; ++l) u(l) = std::clamp(u(l), input_lo(l), input_hi(l));
  return u;
}

std::vector<std::vector<Vec>> unicycle_approach_plans(double dt, double v_r, double omega_r,
                                                      const Vec& input_lo, const Vec& input_hi,
                                                      const Vec& x0, int horizon, int top_k) {
  const auto f = [dt, v_r, omega_r](const Vec& x, const Vec& u) {
    Vec next(3);
    next(0) = x(0) + dt * (u(1) * x(1) - u(0) + v_r * std::cos(x(2)));
    next(1) = x(1) + dt * (-u(1) * x(0) + v_r * std::sin(x(2)));
    next(2) = x(2) + dt * (omega_r - u(1));
    return next;
  };
  const auto clamp_u = [&](double v, double om) {
    Vec u(2);
    u(0) = std::clamp(v, input_lo(0), input_hi(0));
    u(1) = std::clamp(om, input_lo(1), input_hi(1));
    return u;
  };
  constexpr double kCapture = 0.15;

  struct Scored {
    double capture = 0;  // step of first entry into the capture box, else horizon
    double closest = 0;  // closest nominal approach to the origin
    std::vector<Vec> u;
  };
  std::vector<Scored> scored;  // kept sorted, at most top_k entries
  const auto better = [](const Scored& a, const Scored& b) {
    if (a.capture != b.capture) return a.capture < b.capture;
    return a.closest < b.closest;
  };

  // Phase grids: stop-and-turn, drive toward the reference while co-rotating,
  // stop-and-turn again, then hand over to the tracking law.
  const double om_mid = omega_r;
  const std::vector<double> om1s = {input_lo(1), om_mid, input_hi(1)};
  const std::vector<double> v2s = {v_r, 0.5 * (v_r + input_hi(0)), input_hi(0)};
  const std::vector<double> om2s = {0.5 * om_mid, om_mid, 1.5 * om_mid};
  const std::vector<double> om3s = {input_lo(1), input_hi(1)};
  for (int n1 = 0; n1 <= 13; ++n1)
    for (const double om1 : om1s)
      for (int n2 = 0; n2 <= 32; n2 += 2)
        for (const double v2 : v2s)
          for (const double om2 : om2s)
            for (int n3 = 0; n3 <= 9; n3 += 3)
              for (const double om3 : om3s) {
                Scored s;
                s.u.reserve(horizon);
                s.capture = horizon;
                s.closest = x0.cwiseAbs().maxCoeff();
                Vec x = x0;
                const int phase_n[3] = {n1, n2, n3};
                const Vec phase_u[3] = {clamp_u(0.0, om1), clamp_u(v2, om2),
                                        clamp_u(0.0, om3)};
                bool captured = x.cwiseAbs().maxCoeff() < kCapture;
                for (int ph = 0; ph < 3 && !captured; ++ph)
                  for (int t = 0; t < phase_n[ph] && !captured; ++t) {
                    if (static_cast<int>(s.u.size()) >= horizon) break;
                    s.u.push_back(phase_u[ph]);
                    x = f(x, s.u.back());
                    s.closest = std::min(s.closest, x.cwiseAbs().maxCoeff());
                    captured = x.cwiseAbs().maxCoeff() < kCapture;
                  }
                while (static_cast<int>(s.u.size()) < horizon) {
                  if (captured && s.capture >= horizon)
                    s.capture = static_cast<double>(s.u.size());
                  s.u.push_back(unicycle_tracking_law(x, v_r, omega_r, input_lo, input_hi));
                  x = f(x, s.u.back());
                  s.closest = std::min(s.closest, x.cwiseAbs().maxCoeff());
                  captured = captured || x.cwiseAbs().maxCoeff() < kCapture;
                }
                const auto pos = std::lower_bound(scored.begin(), scored.end(), s, better);
                if (pos != scored.end() || static_cast<int>(scored.size()) < top_k)
                  scored.insert(pos, std::move(s));
                if (static_cast<int>(scored.size()) > top_k) scored.pop_back();
              }

  std::vector<std::vector<Vec>> out;
  for (int i = 0; i < top_k && i < static_cast<int>(scored.size()); ++i)
    out.push_back(std::move(scored[i].u));
  return out;
}

Vec RkhsExpansion::eval(const Hyperparams& hp, const Vec& x, const Vec& u) const {
  Vec z(hp.n_x + hp.n_u);
  z << x, u;
  Vec out = Vec::Zero(hp.n_x);
  for (int i = 0; i < hp.n_x; ++i)
    for (int m = 0; m < centers.rows(); ++m)
      out(i) += weights(m, i) * se_kernel(hp, z, centers.row(m).transpose(), i);
  return out;
}

double RkhsExpansion::norm(const Hyperparams& hp, int i) const {
  const int m = static_cast<int>(centers.rows());
  Mat K(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      K(a, b) = se_kernel(hp, centers.row(a).transpose(), centers.row(b).transpose(), i);
  return std::sqrt(std::max(0.0, weights.col(i).dot(K * weights.col(i))));
}

RkhsExpansion fit_rkhs_expansion(const Hyperparams& hp, const Mat& centers,
                                 const std::function<Vec(const Vec&, const Vec&)>& target,
                                 const Vec& norm_budget, double ridge) {
  const int m = static_cast<int>(centers.rows());
  RkhsExpansion exp;
  exp.centers = centers;
  exp.weights = Mat::Zero(m, hp.n_x);
  for (int i = 0; i < hp.n_x; ++i) {
    Mat K(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        K(a, b) = se_kernel(hp, centers.row(a).transpose(), centers.row(b).transpose(), i);
    Vec y(m);
    for (int a = 0; a < m; ++a) {
      const Vec x = centers.row(a).head(hp.n_x).transpose();
      const Vec u = centers.row(a).tail(hp.n_u).transpose();
      y(a) = target(x, u)(i);
    }
    K.diagonal().array() += ridge;
    exp.weights.col(i) = K.ldlt().solve(y);
    const double nrm = exp.norm(hp, i);
    if (nrm > norm_budget(i)) exp.weights.col(i) *= norm_budget(i) / nrm;
  }
  return exp;
}

Plant rkhs_plant(const Hyperparams& hp, const RkhsExpansion& expansion, const Vec& sigma_w) {
  Plant p;
  p.sigma_w = sigma_w;
  p.f = [hp, expansion](const Vec& x, const Vec& u) { return expansion.eval(hp, x, u); };
  return p;
}

}  // namespace etmpc
