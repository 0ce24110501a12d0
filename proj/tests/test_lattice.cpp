#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "etmpc/lattice.hpp"

using namespace etmpc;

namespace {

Hyperparams hp_lat() {
  Hyperparams hp;
  hp.n_x = 2;
  hp.n_u = 0;
  hp.alpha = Vec::Constant(2, 1.0);
  hp.length_scales = Mat(2, 2);
  hp.length_scales << 1.0, 1.3, 0.8, 1.1;
  hp.b = Vec::Constant(2, 0.5);
  hp.sigma_w = Vec::Constant(2, 0.0);
  return hp;
}

Lattice small_lattice() {
  Vec eta(2), lo(2), hi(2);
  eta << 0.1, 0.15;
  lo << -0.5, -0.6;
  hi << 0.5, 0.6;
  return Lattice(eta, lo, hi);
}

}  // namespace

TEST_CASE("lattice spacing and coordinate roundtrips") {
  const Lattice lat = small_lattice();
  CHECK(lat.dim() == 2);
  // spacing = (2 / sqrt(n)) eta
  CHECK(lat.spacing()(0) == doctest::Approx(2.0 / std::sqrt(2.0) * 0.1).epsilon(1e-14));
  CHECK(lat.spacing()(1) == doctest::Approx(2.0 / std::sqrt(2.0) * 0.15).epsilon(1e-14));
  CHECK(lat.size() > 0);
  for (long idx = 0; idx < lat.size(); ++idx) {
    const std::vector<int> z = lat.coords_of(idx);
    CHECK(lat.index_of(z) == idx);
    CHECK(lat.in_range(z));
    const Vec p = lat.point(idx);
    for (int l = 0; l < 2; ++l)
      CHECK(p(l) == doctest::Approx(z[l] * lat.spacing()(l)).epsilon(1e-14));
    // The represented points all lie inside the domain box.
    CHECK(p(0) >= -0.5 - 1e-12);
    CHECK(p(0) <= 0.5 + 1e-12);
  }
}

TEST_CASE("nearest lattice point is the rounding of the query") {
  const Lattice lat = small_lattice();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-0.7, 0.7);
  for (int t = 0; t < 200; ++t) {
    Vec x(2);
    x << unif(rng), unif(rng);
    const std::vector<int> z = lat.nearest(x);
    CHECK(lat.in_range(z));
    for (int l = 0; l < 2; ++l) {
      const int ideal = static_cast<int>(std::lround(x(l) / lat.spacing()(l)));
      const int clamped = std::clamp(ideal, lat.coord_min(l), lat.coord_max(l));
      CHECK(z[l] == clamped);
    }
  }
}

TEST_CASE("coord_range matches a brute-force scan") {
  const Lattice lat = small_lattice();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-0.7, 0.7);
  for (int t = 0; t < 100; ++t) {
    Vec a(2), b(2);
    a << unif(rng), unif(rng);
    b << unif(rng), unif(rng);
    const Vec lo = a.cwiseMin(b), hi = a.cwiseMax(b);
    std::vector<int> z_lo, z_hi;
    const bool nonempty = lat.coord_range(lo, hi, z_lo, z_hi);
    // Brute force over all represented points.
    std::vector<int> bf_lo(2, 1 << 20), bf_hi(2, -(1 << 20));
    long count = 0;
    for (long idx = 0; idx < lat.size(); ++idx) {
      const Vec p = lat.point(idx);
      if ((p.array() >= lo.array() - 1e-9).all() && (p.array() <= hi.array() + 1e-9).all()) {
        ++count;
        const auto z = lat.coords_of(idx);
        for (int l = 0; l < 2; ++l) {
          bf_lo[l] = std::min(bf_lo[l], z[l]);
          bf_hi[l] = std::max(bf_hi[l], z[l]);
        }
      }
    }
    CHECK(nonempty == (count > 0));
    if (nonempty)
      for (int l = 0; l < 2; ++l) {
        CHECK(z_lo[l] == bf_lo[l]);
        CHECK(z_hi[l] == bf_hi[l]);
      }
  }
}

TEST_CASE("metric ball offsets match brute force") {
  const Lattice lat = small_lattice();
  const MetricContext ctx = MetricContext::from_hyperparams(hp_lat());
  for (const double gamma : {0.05, 0.2, 0.5}) {
    for (int i = 0; i < 2; ++i) {
      const auto offsets = metric_ball_offsets(lat, ctx, gamma, i);
      const double sq = metric_radius_sqnorm(ctx, gamma, i);
      // Brute force over a generous offset window.
      long expected = 0;
      for (int o0 = -30; o0 <= 30; ++o0)
        for (int o1 = -30; o1 <= 30; ++o1) {
          Vec v(2);
          v << o0 * lat.spacing()(0), o1 * lat.spacing()(1);
          if (ctx.weighted_sqnorm(v, i) <= sq + 1e-12) ++expected;
        }
      CHECK(static_cast<long>(offsets.size()) == expected);
      bool has_zero = false;
      for (const auto& o : offsets) {
        Vec v(2);
        v << o[0] * lat.spacing()(0), o[1] * lat.spacing()(1);
        CHECK(ctx.weighted_sqnorm(v, i) <= sq + 1e-12);
        if (o[0] == 0 && o[1] == 0) has_zero = true;
      }
      CHECK(has_zero);
    }
  }
}

TEST_CASE("interior and dilation: identity at zero, duality, nesting") {
  const Lattice lat = small_lattice();
  const MetricContext ctx = MetricContext::from_hyperparams(hp_lat());
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coin(0, 2);
  IndexSet set(lat.size());
  for (long idx = 0; idx < lat.size(); ++idx)
    if (coin(rng) == 0) set.insert(idx);

  const Vec zero = Vec::Zero(2);
  CHECK(int_shrink(lat, ctx, set, zero) == set);
  CHECK(out_grow(lat, ctx, set, zero) == set);

  Vec radii(2);
  radii << 0.25, 0.25;
  const IndexSet inner = int_shrink(lat, ctx, set, radii);
  const IndexSet outer = out_grow(lat, ctx, set, radii);
  CHECK(inner.subset_of(set));
  CHECK(set.subset_of(outer));

  // Duality: Int(Q) = complement of Out(complement of Q), with boundary
  // growth counting as leaving the domain.
  IndexSet comp(lat.size());
  for (long idx = 0; idx < lat.size(); ++idx)
    if (!set.contains(idx)) comp.insert(idx);
  bool overflow = false;
  const IndexSet grown_comp = out_grow(lat, ctx, comp, radii, &overflow);
  IndexSet dual(lat.size());
  for (long idx = 0; idx < lat.size(); ++idx)
    if (!grown_comp.contains(idx)) dual.insert(idx);
  // Points whose ball leaves the domain are removed by Int but not by the
  // complement construction; they must be the only difference.
  CHECK(inner.subset_of(dual));
  for (const long idx : dual.indices()) {
    if (inner.contains(idx)) continue;
    // Near the domain boundary some neighbor fell outside.
    const auto z = lat.coords_of(idx);
    bool boundary = false;
    for (int i = 0; i < 2 && !boundary; ++i)
      for (const auto& o : metric_ball_offsets(lat, ctx, radii(i), i)) {
        std::vector<int> zn = z;
        for (int l = 0; l < 2; ++l) zn[l] += o[l];
        if (!lat.in_range(zn)) {
          boundary = true;
          break;
        }
      }
    CHECK(boundary);
  }
}

TEST_CASE("interior against a direct neighbor scan") {
  const Lattice lat = small_lattice();
  const MetricContext ctx = MetricContext::from_hyperparams(hp_lat());
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> coin(0, 1);
  IndexSet set(lat.size());
  for (long idx = 0; idx < lat.size(); ++idx)
    if (coin(rng) == 0) set.insert(idx);
  Vec radii(2);
  radii << 0.3, 0.2;
  const IndexSet inner = int_shrink(lat, ctx, set, radii);
  for (long idx = 0; idx < lat.size(); ++idx) {
    bool keep = set.contains(idx);
    const auto z = lat.coords_of(idx);
    for (int i = 0; i < 2 && keep; ++i)
      for (const auto& o : metric_ball_offsets(lat, ctx, radii(i), i)) {
        std::vector<int> zn = z;
        for (int l = 0; l < 2; ++l) zn[l] += o[l];
        if (!lat.in_range(zn) || !set.contains(lat.index_of(zn))) {
          keep = false;
          break;
        }
      }
    CHECK(inner.contains(idx) == keep);
  }
}

TEST_CASE("set text serialization roundtrip") {
  const Lattice lat = small_lattice();
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> coin(0, 3);
  IndexSet set(lat.size());
  for (long idx = 0; idx < lat.size(); ++idx)
    if (coin(rng) == 0) set.insert(idx);
  const std::string text = set_to_text(lat, set);
  const IndexSet back = set_from_text(lat, text);
  CHECK(back == set);
  CHECK(set_to_text(lat, back) == text);
  const IndexSet empty(lat.size());
  CHECK(set_from_text(lat, set_to_text(lat, empty)) == empty);
}
