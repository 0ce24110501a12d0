#include <doctest.h>

#include <cmath>
#include <random>

#include "etmpc/dataset.hpp"
#include "etmpc/gp.hpp"

using namespace etmpc;

namespace {

Hyperparams hp_2d() {
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

Dataset make_data(const Hyperparams& hp, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Dataset d(hp.n_x, hp.n_u);
  for (int r = 0; r < n; ++r) {
    Vec x(hp.n_x), u(hp.n_u), y(hp.n_x);
    for (int i = 0; i < hp.n_x; ++i) x(i) = unif(rng);
    for (int l = 0; l < hp.n_u; ++l) u(l) = unif(rng);
    for (int i = 0; i < hp.n_x; ++i) y(i) = 0.3 * std::sin(x.sum() + u.sum()) + 0.1 * unif(rng);
    d.append(x, u, y);
  }
  return d;
}

}  // namespace

TEST_CASE("se_kernel closed-form values") {
  Hyperparams hp;
  hp.n_x = 1;
  hp.n_u = 0;
  hp.alpha = Vec::Constant(1, 1.0);
  hp.length_scales = Mat::Constant(1, 1, 1.0);
  hp.b = Vec::Constant(1, 1.0);
  hp.sigma_w = Vec::Constant(1, 0.1);
  Vec z0 = Vec::Zero(1), z1 = Vec::Constant(1, 1.0);
  CHECK(se_kernel(hp, z0, z0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  // exp(-1/2) for unit distance at unit length scale
  CHECK(se_kernel(hp, z0, z1, 0) == doctest::Approx(0.60653065971263342).epsilon(1e-14));

  const Hyperparams hp2 = hp_2d();
  Vec a(3), b(3);
  a << 0.0, 0.0, 0.0;
  b << 0.5, -0.7, 0.0;
  // 1.3^2 exp(-[(0.5/0.9)^2 + (0.7/1.1)^2]/2), frozen with mpmath
  CHECK(se_kernel(hp2, a, b, 0) ==
        doctest::Approx(std::exp(-0.5 * (0.5 * 0.5 / 0.81 + 0.49 / 1.21))).epsilon(1e-14));
  Hyperparams hp3 = hp2;
  hp3.alpha(0) = 1.3;
  CHECK(se_kernel(hp3, a, b, 0) == doctest::Approx(1.18285168173167530).epsilon(1e-14));
}

TEST_CASE("single-point posterior closed forms") {
  Hyperparams hp;
  hp.n_x = 1;
  hp.n_u = 1;
  hp.alpha = Vec::Constant(1, 1.2);
  hp.length_scales = Mat::Constant(1, 2, 1.0);
  hp.b = Vec::Constant(1, 0.8);
  hp.sigma_w = Vec::Constant(1, 0.1);
  Dataset d(1, 1);
  d.append(Vec::Constant(1, 0.4), Vec::Constant(1, -0.2), Vec::Constant(1, 0.7));
  const GpModel m = GpModel::fit(d, hp);
  const Vec x = Vec::Constant(1, 0.4), u = Vec::Constant(1, -0.2);
  // mu = alpha^2 y / (alpha^2 + sigma_w^2), var = alpha^2 - alpha^4 / (alpha^2 + sigma_w^2),
  // beta = sqrt(b^2 - y^2 / (alpha^2 + sigma_w^2) + 1); frozen with mpmath.
  CHECK(m.predict_mean(x, u)(0) == doctest::Approx(0.69517241379310345).epsilon(1e-13));
  CHECK(m.predict_variance(x, u, 0) == doctest::Approx(0.00993103448275862).epsilon(1e-10));
  CHECK(m.beta(0) == doctest::Approx(1.14108236579014811).epsilon(1e-13));
  CHECK(m.predict_sigma(x, u)(0) ==
        doctest::Approx(std::sqrt(m.predict_variance(x, u, 0))).epsilon(1e-14));
}

TEST_CASE("batched grid evaluation matches per-point queries") {
  const Hyperparams hp = hp_2d();
  const GpModel m = GpModel::fit(make_data(hp, 40, 7), hp);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  Mat states(6, 2), inputs(4, 1);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 2; ++c) states(r, c) = unif(rng);
  for (int r = 0; r < 4; ++r) inputs(r, 0) = unif(rng);
  for (int i = 0; i < 2; ++i) {
    const Mat mu = m.mean_grid(states, inputs, i);
    REQUIRE(mu.rows() == 6);
    REQUIRE(mu.cols() == 4);
    for (int s = 0; s < 6; ++s)
      for (int ui = 0; ui < 4; ++ui)
        CHECK(mu(s, ui) == doctest::Approx(m.predict_mean(states.row(s).transpose(),
                                                          inputs.row(ui).transpose())(i))
                               .epsilon(1e-10));
    for (int ui = 0; ui < 4; ++ui) {
      const Vec sig = m.sigma_states(states, inputs.row(ui).transpose(), i);
      for (int s = 0; s < 6; ++s)
        CHECK(sig(s) == doctest::Approx(std::sqrt(m.predict_variance(
                            states.row(s).transpose(), inputs.row(ui).transpose(), i)))
                            .epsilon(1e-9));
    }
  }
}

TEST_CASE("posterior interpolates data under small noise") {
  Hyperparams hp = hp_2d();
  hp.sigma_w = Vec::Constant(2, 1e-4);
  const Dataset d = make_data(hp, 25, 3);
  const GpModel m = GpModel::fit(d, hp);
  for (int r = 0; r < d.size(); ++r) {
    const Vec x = d.inputs().row(r).head(2);
    const Vec u = d.inputs().row(r).tail(1);
    const Vec mu = m.predict_mean(x, u);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(mu(i) - d.targets()(r, i)) < 1e-2);
  }
}

TEST_CASE("variance bounds and monotonicity under data growth") {
  const Hyperparams hp = hp_2d();
  const Dataset d_small = make_data(hp, 15, 5);
  Dataset d_big = make_data(hp, 15, 5);
  d_big.append_all(make_data(hp, 15, 6));
  const GpModel m_small = GpModel::fit(d_small, hp);
  const GpModel m_big = GpModel::fit(d_big, hp);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    Vec x(2), u(1);
    x << unif(rng), unif(rng);
    u << unif(rng);
    for (int i = 0; i < 2; ++i) {
      const double vs = m_small.predict_variance(x, u, i);
      const double vb = m_big.predict_variance(x, u, i);
      CHECK(vs >= 0.0);
      CHECK(vs <= hp.alpha(i) * hp.alpha(i) + 1e-12);
      // Conditioning on more data never increases posterior variance.
      CHECK(vb <= vs + 1e-9);
    }
  }
}

TEST_CASE("beta grows like sqrt of the data size") {
  const Hyperparams hp = hp_2d();
  for (const int n : {10, 40}) {
    const GpModel m = GpModel::fit(make_data(hp, n, 13), hp);
    for (int i = 0; i < 2; ++i) {
      CHECK(m.beta(i) > 0.0);
      // b^2 - Y^T (K + sigma^2 I)^{-1} Y <= b^2, so beta <= sqrt(b^2 + N).
      CHECK(m.beta(i) <= std::sqrt(hp.b(i) * hp.b(i) + n) + 1e-12);
    }
  }
}

TEST_CASE("far-field posterior reverts to the prior") {
  const Hyperparams hp = hp_2d();
  const GpModel m = GpModel::fit(make_data(hp, 30, 21), hp);
  Vec x(2), u(1);
  x << 80.0, -90.0;
  u << 70.0;
  for (int i = 0; i < 2; ++i)
    CHECK(m.predict_variance(x, u, i) == doctest::Approx(hp.alpha(i) * hp.alpha(i)).epsilon(1e-9));
  CHECK(m.predict_mean(x, u).cwiseAbs().maxCoeff() < 1e-9);
}
