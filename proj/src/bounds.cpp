#include "etmpc/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace etmpc {

double metric_of_sqnorm(double alpha, double sqnorm) {
  return std::sqrt(2.0 * alpha * alpha * (1.0 - std::exp(-0.5 * sqnorm)));
}

double kernel_metric(const MetricContext& ctx, const Vec& x1, const Vec& x2, int i) {
  return metric_of_sqnorm(ctx.alpha(i), ctx.weighted_sqnorm(x1 - x2, i));
}

double metric_radius_sqnorm(const MetricContext& ctx, double gamma, int i) {
  const double a2 = ctx.alpha(i) * ctx.alpha(i);
  const double ratio = gamma * gamma / (2.0 * a2);
  if (ratio >= 1.0)
    throw std::invalid_argument("metric_radius_sqnorm: radius >= sqrt(2) alpha (ball is all of space)");
  return -2.0 * std::log(1.0 - ratio);
}

Vec delta(const GpModel& model, const Vec& x, const Vec& u) {
  const Hyperparams& hp = model.hyperparams();
  Vec d(hp.n_x);
  for (int i = 0; i < hp.n_x; ++i)
    d(i) = model.beta(i) * std::sqrt(model.predict_variance(x, u, i)) + hp.sigma_w(i);
  return d;
}

IntervalBox enclosure(const GpModel& model, const Vec& x, const Vec& u) {
  const Vec mu = model.predict_mean(x, u);
  const Vec sigma = model.predict_sigma(x, u);
  const Vec half = model.beta().cwiseProduct(sigma);
  return {mu - half, mu + half};
}

IntervalBox enclosure_with_noise(const GpModel& model, const Vec& x, const Vec& u) {
  const IntervalBox f = enclosure(model, x, u);
  return f.widened(model.hyperparams().sigma_w);
}

Vec zeta_hat(const MetricContext& ctx, const Vec& d_vec) {
  const Vec bd = ctx.b.cwiseProduct(d_vec);
  Vec out(ctx.n_x);
  for (int i = 0; i < ctx.n_x; ++i)
    out(i) = metric_of_sqnorm(ctx.alpha(i), ctx.weighted_sqnorm(bd, i));
  return out;
}

Vec zeta(const MetricContext& ctx, const GpModel& model, const Vec& d_vec, const Vec& x2,
         const Vec& u) {
  const Vec arg = ctx.b.cwiseProduct(d_vec) + delta(model, x2, u);
  Vec out(ctx.n_x);
  for (int i = 0; i < ctx.n_x; ++i)
    out(i) = metric_of_sqnorm(ctx.alpha(i), ctx.weighted_sqnorm(arg, i));
  return out;
}

}  // namespace etmpc
