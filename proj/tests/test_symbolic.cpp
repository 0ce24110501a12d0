#include <doctest.h>

#include <cmath>
#include <random>

#include "etmpc/checks.hpp"
#include "etmpc/symbolic.hpp"
#include "support/toy.hpp"

using namespace etmpc;

namespace {

Hyperparams hp_1d() {
  Hyperparams hp;
  hp.n_x = 1;
  hp.n_u = 1;
  hp.alpha = Vec::Constant(1, 1.2);
  hp.length_scales = Mat::Constant(1, 2, 0.8);
  hp.b = Vec::Constant(1, 0.5);
  hp.sigma_w = Vec::Constant(1, 0.01);
  return hp;
}

GpModel model_1d(std::uint64_t seed) {
  const Hyperparams hp = hp_1d();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Dataset d(1, 1);
  for (int r = 0; r < 25; ++r) {
    Vec x(1), u(1), y(1);
    x << unif(rng);
    u << unif(rng);
    y << 0.6 * x(0) + 0.2 * u(0) + 0.01 * unif(rng);
    d.append(x, u, y);
  }
  return GpModel::fit(d, hp);
}

SymbolicParams params_1d() {
  SymbolicParams p;
  p.eta_x = Vec::Constant(1, 0.05);
  p.eta_u = Vec::Constant(1, 0.2);
  p.z_ints = {1};
  p.spec_lo = Vec::Constant(1, -0.5);
  p.spec_hi = Vec::Constant(1, 0.5);
  p.input_lo = Vec::Constant(1, -1.0);
  p.input_hi = Vec::Constant(1, 1.0);
  return p;
}

}  // namespace

TEST_CASE("abstraction precision bounds: frozen values and monotonicity") {
  // 1-D: alpha = 1.2, length scale 0.8, eta = 0.05; frozen with mpmath.
  const Hyperparams hp = hp_1d();
  const Vec eta = Vec::Constant(1, 0.05);
  CHECK(epsilon_lower_bound(hp, eta)(0) ==
        doctest::Approx(0.07496339380304655).epsilon(1e-13));
  CHECK(contractive_radii(hp, eta, {1})(0) ==
        doctest::Approx(0.14970750752884334).epsilon(1e-13));
  CHECK(contractive_radii(hp, eta, {3})(0) ==
        doctest::Approx(0.44220450246979686).epsilon(1e-13));
  CHECK_THROWS(contractive_radii(hp, eta, {0}));

  // 3-D isotropic instance.
  Hyperparams hp3;
  hp3.n_x = 3;
  hp3.n_u = 2;
  hp3.alpha = Vec::Constant(3, 2.0);
  hp3.length_scales = Mat::Constant(3, 5, 5.0);
  hp3.b = Vec::Constant(3, 1.0);
  hp3.sigma_w = Vec::Constant(3, 0.001);
  const Vec eta3 = Vec::Constant(3, 0.02);
  for (int i = 0; i < 3; ++i) {
    CHECK(epsilon_lower_bound(hp3, eta3)(i) ==
          doctest::Approx(0.013856323322527946).epsilon(1e-13));
    CHECK(contractive_radii(hp3, eta3, {1, 1, 1})(i) ==
          doctest::Approx(0.015999872000853329).epsilon(1e-13));
    CHECK(contractive_radii(hp3, eta3, {2, 2, 2})(i) ==
          doctest::Approx(0.031998976027306142).epsilon(1e-13));
  }
  // Radii grow with z and shrink with a finer lattice; epsilon is always
  // below the radius at z >= 1 (same formula, larger squared norm).
  CHECK(contractive_radii(hp3, eta3, {2, 1, 1})(0) > contractive_radii(hp3, eta3, {1, 1, 1})(0));
  CHECK(contractive_radii(hp3, 0.5 * eta3, {1, 1, 1})(0) <
        contractive_radii(hp3, eta3, {1, 1, 1})(0));
  CHECK(epsilon_lower_bound(hp3, eta3)(0) < contractive_radii(hp3, eta3, {1, 1, 1})(0));
}

TEST_CASE("successor boxes against direct per-point model queries") {
  const GpModel m = model_1d(41);
  const Hyperparams& hp = m.hyperparams();
  const SymbolicParams p = params_1d();
  const SymbolicModel sym(m, p);
  const Lattice& lat = sym.state_lattice();
  const Vec sp = lat.spacing();
  const double margin = hp.b(0) * sym.epsilon()(0) + p.eta_x(0);
  std::vector<int> lo(1), hi(1);
  long checked = 0;
  for (long s = 0; s < lat.size(); ++s) {
    for (int u = 0; u < sym.num_inputs(); ++u) {
      const Vec xs = lat.point(s);
      const Vec uu = sym.input_point(u);
      const double mu = m.predict_mean(xs, uu)(0);
      const double dl = m.beta(0) * std::sqrt(m.predict_variance(xs, uu, 0)) + hp.sigma_w(0);
      const double half = dl + margin;
      const long zl = static_cast<long>(std::ceil((mu - half) / sp(0) - 1e-9));
      const long zh = static_cast<long>(std::floor((mu + half) / sp(0) + 1e-9));
      const bool fits = zl >= lat.coord_min(0) && zh <= lat.coord_max(0);
      CHECK(sym.blocked(s, u) == !fits);
      if (fits) {
        sym.successor_range(s, u, lo, hi);
        CHECK(lo[0] == zl);
        CHECK(hi[0] == zh);
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("safety game fixed point on a hand-built chain") {
  // States 0..4, inputs {stay, right}. stay: s -> {s}; right: s -> {s+1}
  // (disabled at 4). Unsafe set is {4}: q0 = {0,1,2,3}. Every state in q0
  // keeps itself with "stay", so the fixed point is q0 itself.
  const long n = 5;
  IndexSet q0(n);
  for (long s = 0; s < 4; ++s) q0.insert(s);
  auto enabled = [](long s, int u) { return u == 0 || s < 4; };
  auto contained = [](long s, int u, const IndexSet& q) {
    return q.contains(u == 0 ? s : s + 1);
  };
  const IndexSet fp = safety_game_fixed_point(n, 2, q0, enabled, contained);
  CHECK(fp == q0);

  // Drop "stay": right is the only input, so survival requires the whole
  // suffix to survive; nothing does because 3 -> 4 leaves q0.
  auto enabled2 = [](long s, int u) { return u == 1 && s < 4; };
  const IndexSet fp2 = safety_game_fixed_point(n, 2, q0, enabled2, contained);
  CHECK(fp2.empty());

  // A two-state cycle 0 -> 1 -> 0 survives even without self-loops.
  IndexSet q0c(n);
  q0c.insert(0);
  q0c.insert(1);
  auto contained_c = [](long s, int, const IndexSet& q) { return q.contains(s == 0 ? 1 : 0); };
  auto enabled_c = [](long s, int u) { return u == 0 && s < 2; };
  CHECK(safety_game_fixed_point(n, 1, q0c, enabled_c, contained_c) == q0c);
}

TEST_CASE("game fixed point against the independent worklist solver") {
  const SuiteResult r = check_game_oracle(99, 20, 40, 5);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("interior/dilation duality suite") {
  const SuiteResult r = check_duality(7, 40);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("toy synthesis invariants") {
  const auto& fx = etmpc::testing::toy_fixture();
  const SafeSynthesis& syn = fx.synthesis;
  REQUIRE(!syn.empty());
  const SymbolicModel& sym = syn.symbolic();
  const Lattice& lat = sym.state_lattice();
  const IndexSet& fp = syn.fixed_point();
  const IndexSet& term = syn.terminal_set();

  // gamma defaults to the contraction radius; terminal = Int(fp; gamma_tilde).
  CHECK(syn.gamma()(0) == doctest::Approx(sym.gamma_tilde()(0)).epsilon(1e-15));
  CHECK(term == int_shrink(lat, sym.metric(), fp, sym.gamma_tilde()));
  CHECK(term.subset_of(fp));
  CHECK(!term.empty());

  // Every fixed-point state has an admissible input whose successors land in
  // the terminal interior, and the refined controller picks one of them.
  for (const long s : fp.indices()) {
    const auto& adm = syn.admissible_inputs(s);
    REQUIRE(!adm.empty());
    for (const int u : adm) {
      REQUIRE(!sym.blocked(s, u));
      for (const long t : sym.successors(s, u)) CHECK(term.contains(t));
    }
    const Vec p = lat.point(s);
    CHECK(syn.in_safe_set(p));
    const Vec u = syn.control(p);
    bool matches = false;
    for (const int a : adm)
      matches |= (u - sym.input_point(a)).cwiseAbs().maxCoeff() < 1e-12;
    CHECK(matches);
  }
  for (const long s : term.indices()) CHECK(syn.in_terminal_set(lat.point(s)));

  // Far outside the box, membership fails.
  CHECK(!syn.in_safe_set(Vec::Constant(lat.dim(), 10.0)));
  CHECK(!syn.in_terminal_set(Vec::Constant(lat.dim(), 10.0)));

  // Distance field: zero exactly on terminal cells, positive elsewhere.
  for (long s = 0; s < lat.size(); ++s) {
    const double d = syn.terminal_distance(lat.point(s));
    if (term.contains(s))
      CHECK(d == 0.0);
    else
      CHECK(d > 0.0);
  }
}

TEST_CASE("candidate pruning only removes transitions") {
  const GpModel m = model_1d(43);
  const SymbolicParams p_full = params_1d();
  SymbolicParams p_cut = p_full;
  p_cut.candidate_inputs = 2;
  const SymbolicModel full(m, p_full);
  const SymbolicModel cut(m, p_cut);
  REQUIRE(full.num_inputs() == cut.num_inputs());
  const Lattice& lat = full.state_lattice();
  std::vector<int> lo_f(1), hi_f(1), lo_c(1), hi_c(1);
  long kept = 0;
  for (long s = 0; s < lat.size(); ++s)
    for (int u = 0; u < full.num_inputs(); ++u) {
      if (cut.blocked(s, u)) continue;
      // Anything the pruned model keeps, the full model keeps identically.
      REQUIRE(!full.blocked(s, u));
      full.successor_range(s, u, lo_f, hi_f);
      cut.successor_range(s, u, lo_c, hi_c);
      CHECK(lo_f == lo_c);
      CHECK(hi_f == hi_c);
      ++kept;
    }
  CHECK(kept > 0);
  // The pruned fixed point is contained in the full one.
  const auto run_game = [&](const SymbolicModel& sm) {
    IndexSet q0(lat.size());
    for (long s = 0; s < lat.size(); ++s) q0.insert(s);
    auto enabled = [&](long s, int u) { return !sm.blocked(s, u); };
    auto contained = [&](long s, int u, const IndexSet& q) {
      for (const long t : sm.successors(s, u))
        if (!q.contains(t)) return false;
      return true;
    };
    return safety_game_fixed_point(lat.size(), sm.num_inputs(), q0, enabled, contained);
  };
  CHECK(run_game(cut).subset_of(run_game(full)));
}
