#include <doctest.h>

#include <cmath>
#include <random>

#include "etmpc/bounds.hpp"
#include "etmpc/dataset.hpp"
#include "etmpc/gp.hpp"
#include "etmpc/plants.hpp"

using namespace etmpc;

namespace {

Hyperparams hp_pair() {
  Hyperparams hp;
  hp.n_x = 2;
  hp.n_u = 1;
  hp.alpha = Vec(2);
  hp.alpha << 1.0, 1.3;
  hp.length_scales = Mat(2, 3);
  hp.length_scales << 0.9, 1.1, 1.0, 1.2, 0.8, 1.5;
  hp.b = Vec(2);
  hp.b << 0.7, 0.6;
  hp.sigma_w = Vec(2);
  hp.sigma_w << 0.05, 0.05;
  return hp;
}

}  // namespace

TEST_CASE("kernel metric frozen values") {
  Hyperparams hp;
  hp.n_x = 1;
  hp.n_u = 0;
  hp.alpha = Vec::Constant(1, 1.0);
  hp.length_scales = Mat::Constant(1, 1, 1.0);
  hp.b = Vec::Constant(1, 1.0);
  hp.sigma_w = Vec::Constant(1, 0.0);
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  const Vec x0 = Vec::Zero(1), x1 = Vec::Constant(1, 1.0);
  // sqrt(2 (1 - exp(-1/2))), frozen with mpmath
  CHECK(kernel_metric(ctx, x0, x1, 0) == doctest::Approx(0.88709564341999400).epsilon(1e-14));

  Hyperparams hp2;
  hp2.n_x = 2;
  hp2.n_u = 0;
  hp2.alpha = Vec::Constant(2, 1.5);
  hp2.length_scales = Mat(2, 2);
  hp2.length_scales << 0.8, 1.2, 0.8, 1.2;
  hp2.b = Vec::Constant(2, 1.0);
  hp2.sigma_w = Vec::Constant(2, 0.0);
  const MetricContext ctx2 = MetricContext::from_hyperparams(hp2);
  Vec a(2), b(2);
  a << 0.0, 0.0;
  b << 0.3, -0.4;
  CHECK(kernel_metric(ctx2, a, b, 0) == doctest::Approx(0.72952703591031495).epsilon(1e-14));
}

TEST_CASE("metric axioms on random points") {
  const Hyperparams hp = hp_pair();
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    Vec x(2), y(2), z(2);
    for (int l = 0; l < 2; ++l) {
      x(l) = unif(rng);
      y(l) = unif(rng);
      z(l) = unif(rng);
    }
    for (int i = 0; i < 2; ++i) {
      const double dxy = kernel_metric(ctx, x, y, i);
      CHECK(kernel_metric(ctx, x, x, i) == 0.0);
      CHECK(dxy == kernel_metric(ctx, y, x, i));
      CHECK(dxy >= 0.0);
      CHECK(dxy < std::sqrt(2.0) * ctx.alpha(i));
      CHECK(kernel_metric(ctx, x, z, i) <= dxy + kernel_metric(ctx, y, z, i) + 1e-12);
    }
  }
}

TEST_CASE("metric radius inverts the metric") {
  const Hyperparams hp = hp_pair();
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  for (const double gamma : {0.05, 0.3, 0.9, 1.2}) {
    for (int i = 0; i < 2; ++i) {
      if (gamma >= std::sqrt(2.0) * ctx.alpha(i)) continue;
      const double sq = metric_radius_sqnorm(ctx, gamma, i);
      CHECK(metric_of_sqnorm(ctx.alpha(i), sq) == doctest::Approx(gamma).epsilon(1e-12));
    }
  }
  CHECK(metric_radius_sqnorm(ctx, 0.0, 0) == 0.0);
  CHECK_THROWS(metric_radius_sqnorm(ctx, std::sqrt(2.0) * ctx.alpha(0), 0));
}

TEST_CASE("delta and enclosures agree with the model") {
  const Hyperparams hp = hp_pair();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Dataset d(2, 1);
  for (int r = 0; r < 30; ++r) {
    Vec x(2), u(1), y(2);
    x << unif(rng), unif(rng);
    u << unif(rng);
    y << 0.2 * std::sin(x(0) + u(0)), 0.2 * std::cos(x(1) - u(0));
    d.append(x, u, y);
  }
  const GpModel m = GpModel::fit(d, hp);
  for (int t = 0; t < 20; ++t) {
    Vec x(2), u(1);
    x << unif(rng), unif(rng);
    u << unif(rng);
    const Vec dl = delta(m, x, u);
    const Vec mu = m.predict_mean(x, u);
    const IntervalBox f = enclosure(m, x, u);
    const IntervalBox fw = enclosure_with_noise(m, x, u);
    for (int i = 0; i < 2; ++i) {
      const double sig = std::sqrt(m.predict_variance(x, u, i));
      CHECK(dl(i) == doctest::Approx(m.beta(i) * sig + hp.sigma_w(i)).epsilon(1e-12));
      CHECK(f.lower(i) == doctest::Approx(mu(i) - m.beta(i) * sig).epsilon(1e-12));
      CHECK(f.upper(i) == doctest::Approx(mu(i) + m.beta(i) * sig).epsilon(1e-12));
      CHECK(fw.lower(i) == doctest::Approx(f.lower(i) - hp.sigma_w(i)).epsilon(1e-12));
      CHECK(fw.upper(i) == doctest::Approx(f.upper(i) + hp.sigma_w(i)).epsilon(1e-12));
    }
    CHECK(f.contains(mu));
    CHECK(fw.contains(mu));
  }
}

TEST_CASE("zeta_hat frozen values and monotonicity") {
  const Hyperparams hp = hp_pair();
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  Vec d(2);
  d << 0.2, 0.3;
  const Vec z = zeta_hat(ctx, d);
  // Frozen with an independent evaluation of the formula.
  CHECK(z(0) == doctest::Approx(0.22434410414943548).epsilon(1e-12));
  CHECK(z(1) == doctest::Approx(0.32685499964125430).epsilon(1e-12));
  CHECK(zeta_hat(ctx, Vec::Zero(2)).isZero(0.0));
  // Componentwise monotone in the deviation vector.
  Vec d2 = d;
  d2(0) += 0.1;
  const Vec z2 = zeta_hat(ctx, d2);
  for (int i = 0; i < 2; ++i) CHECK(z2(i) >= z(i));
}

TEST_CASE("zeta dominates zeta_hat by the data uncertainty") {
  const Hyperparams hp = hp_pair();
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Dataset data(2, 1);
  for (int r = 0; r < 20; ++r) {
    Vec x(2), u(1), y(2);
    x << unif(rng), unif(rng);
    u << unif(rng);
    y << 0.1 * x(0), 0.1 * x(1);
    data.append(x, u, y);
  }
  const GpModel m = GpModel::fit(data, hp);
  for (int t = 0; t < 20; ++t) {
    Vec d(2), x(2), u(1);
    d << 0.5 * std::abs(unif(rng)), 0.5 * std::abs(unif(rng));
    x << unif(rng), unif(rng);
    u << unif(rng);
    const Vec zh = zeta_hat(ctx, d);
    const Vec zz = zeta(ctx, m, d, x, u);
    for (int i = 0; i < 2; ++i) CHECK(zz(i) >= zh(i) - 1e-12);
  }
}

TEST_CASE("smoothness bound holds for sampled RKHS functions") {
  // d_i(fhat(x1,u), fhat(x2,u)) <= zeta_hat_i(d(x1,x2)) for functions with
  // norm within the budget b; checked by sampling kernel expansions.
  const Hyperparams hp = hp_pair();
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int f = 0; f < 10; ++f) {
    Mat centers(6, 3);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 3; ++c) centers(r, c) = unif(rng);
    auto target = [&](const Vec& x, const Vec& u) {
      Vec y(2);
      y << 0.5 * std::sin(x(0) + u(0)), 0.5 * std::cos(x(1));
      return y;
    };
    const RkhsExpansion rex = fit_rkhs_expansion(hp, centers, target, hp.b);
    for (int i = 0; i < 2; ++i) REQUIRE(rex.norm(hp, i) <= hp.b(i) + 1e-9);
    for (int t = 0; t < 50; ++t) {
      Vec x1(2), x2(2), u(1);
      x1 << unif(rng), unif(rng);
      x2 << unif(rng), unif(rng);
      u << unif(rng);
      Vec dv(2);
      for (int i = 0; i < 2; ++i) dv(i) = kernel_metric(ctx, x1, x2, i);
      const Vec bound = zeta_hat(ctx, dv);
      const Vec f1 = rex.eval(hp, x1, u), f2 = rex.eval(hp, x2, u);
      for (int i = 0; i < 2; ++i)
        CHECK(kernel_metric(ctx, Vec(f1), Vec(f2), i) <= bound(i) + 1e-9);
    }
  }
}
