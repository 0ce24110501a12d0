#pragma once

#include "etmpc/gp.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

// Axis-aligned box in state space, one interval per dimension.
struct IntervalBox {
  Vec lower;
  Vec upper;

  bool contains(const Vec& x, double tol = 0.0) const {
    return (x.array() >= lower.array() - tol).all() && (x.array() <= upper.array() + tol).all();
  }
  IntervalBox widened(const Vec& margin) const { return {lower - margin, upper + margin}; }
};

// State-space kernel metric layer: alpha_i and the state-axis length-scales
// of each GP, plus the RKHS bounds b.
struct MetricContext {
  int n_x = 0;
  Vec alpha;
  Mat length_scales_x;  // row i: first n_x length-scales of GP i
  Vec b;

  static MetricContext from_hyperparams(const Hyperparams& hp) {
    return {hp.n_x, hp.alpha, hp.length_scales.leftCols(hp.n_x), hp.b};
  }

  double lambda_x(int i, int l) const {
    const double s = length_scales_x(i, l);
    return s * s;
  }

  // ||v||^2_{Lambda_{x,i}^{-1}}
  double weighted_sqnorm(const Vec& v, int i) const {
    double s = 0.0;
    for (int l = 0; l < n_x; ++l) {
      const double d = v(l) / length_scales_x(i, l);
      s += d * d;
    }
    return s;
  }
};

// d_i(x1, x2) = sqrt(2 alpha_i^2 (1 - exp(-1/2 ||x1-x2||^2_{Lambda_{x,i}^{-1}}))).
double kernel_metric(const MetricContext& ctx, const Vec& x1, const Vec& x2, int i);

// Kernel-metric value of a raw weighted squared norm; shared by the zeta
// bounds and the metric itself.
double metric_of_sqnorm(double alpha, double sqnorm);

// Inverse of the metric: largest ||x1-x2||^2_{Lambda_{x,i}^{-1}} with
// d_i <= gamma. Requires gamma < sqrt(2) alpha_i.
double metric_radius_sqnorm(const MetricContext& ctx, double gamma, int i);

// delta_{N,i}(x, u) = beta_{N,i} sigma_{f_i}(x, u) + sigma_{w,i}, stacked.
Vec delta(const GpModel& model, const Vec& x, const Vec& u);

// F(x, u; D_N): per-dimension [mu_i +- beta_i sigma_i].
IntervalBox enclosure(const GpModel& model, const Vec& x, const Vec& u);

// F(x, u; D_N) (+) W: each side widened by sigma_{w,i}.
IntervalBox enclosure_with_noise(const GpModel& model, const Vec& x, const Vec& u);

// Bound on d_i(fhat(x1,u), fhat(x2,u)) given the metric vector d(x1,x2).
Vec zeta_hat(const MetricContext& ctx, const Vec& d_vec);

// Bound on d_i(f(x1,u)+w, fhat(x2,u)); adds delta_N(x2,u) inside the norm.
Vec zeta(const MetricContext& ctx, const GpModel& model, const Vec& d_vec, const Vec& x2,
         const Vec& u);

}  // namespace etmpc
