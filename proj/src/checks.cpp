#include "etmpc/checks.hpp"

#include <cmath>
#include <limits>
#include <deque>
#include <random>
#include <sstream>

#include "etmpc/bounds.hpp"
#include "etmpc/dataset.hpp"
#include "etmpc/gp.hpp"
#include "etmpc/hyperparams.hpp"
#include "etmpc/lattice.hpp"
#include "etmpc/plants.hpp"
#include "etmpc/symbolic.hpp"
#include "etmpc/trigger.hpp"

namespace etmpc {

namespace {

Hyperparams random_hyperparams(std::mt19937_64& rng, int n_x, int n_u) {
  std::uniform_real_distribution<double> alpha_d(0.5, 2.0);
  std::uniform_real_distribution<double> ell_d(0.5, 3.0);
  Hyperparams hp;
  hp.n_x = n_x;
  hp.n_u = n_u;
  hp.alpha = Vec(n_x);
  hp.length_scales = Mat(n_x, n_x + n_u);
  hp.sigma_w = Vec::Constant(n_x, 0.01);
  for (int i = 0; i < n_x; ++i) {
    hp.alpha(i) = alpha_d(rng);
    for (int l = 0; l < n_x + n_u; ++l) hp.length_scales(i, l) = ell_d(rng);
  }
  hp.b = Vec(n_x);
  for (int i = 0; i < n_x; ++i) hp.b(i) = 0.9 * hp.assumption3_bound(i);
  return hp;
}

}  // namespace

SuiteResult check_metric_axioms(std::uint64_t seed, int trials) {
  SuiteResult res{"metric_axioms", true, ""};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::uniform_int_distribution<int> dim_d(1, 4);
  for (int t = 0; t < trials; ++t) {
    const int n = dim_d(rng);
    const Hyperparams hp = random_hyperparams(rng, n, 1);
    const MetricContext ctx = MetricContext::from_hyperparams(hp);
    Vec x(n), y(n), z(n);
    for (int l = 0; l < n; ++l) {
      x(l) = coord(rng);
      y(l) = coord(rng);
      z(l) = coord(rng);
    }
    for (int i = 0; i < n; ++i) {
      const double dxy = kernel_metric(ctx, x, y, i);
      const double dyx = kernel_metric(ctx, y, x, i);
      const double dxx = kernel_metric(ctx, x, x, i);
      const double dxz = kernel_metric(ctx, x, z, i);
      const double dzy = kernel_metric(ctx, z, y, i);
      if (dxx != 0.0 || std::abs(dxy - dyx) > 1e-12 ||
          dxy > dxz + dzy + 1e-12 ||
          dxy > std::sqrt(2.0) * hp.alpha(i) * (1.0 + 1e-15)) {
        res.passed = false;
        res.detail = "axiom violated at trial " + std::to_string(t);
        return res;
      }
    }
  }
  res.detail = std::to_string(trials) + " random triples";
  return res;
}

SuiteResult check_containment(std::uint64_t seed, int n_functions, int n_queries) {
  SuiteResult res{"error_bound_containment", true, ""};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_d(1, 2);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  long violations = 0;
  for (int t = 0; t < n_functions; ++t) {
    const int n_x = dim_d(rng);
    const int n_u = 1;
    Hyperparams hp = random_hyperparams(rng, n_x, n_u);
    const int m = 8;
    RkhsExpansion exp;
    exp.centers = Mat(m, n_x + n_u);
    exp.weights = Mat(m, n_x);
    for (int a = 0; a < m; ++a)
      for (int l = 0; l < n_x + n_u; ++l) exp.centers(a, l) = coord(rng);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n_x; ++i) exp.weights(a, i) = 0.1 * weight(rng);
    for (int i = 0; i < n_x; ++i) hp.b(i) = exp.norm(hp, i) * 1.02 + 1e-6;

    const int N = 25;
    Dataset data(n_x, n_u);
    for (int a = 0; a < N; ++a) {
      Vec x(n_x), u(n_u);
      for (int l = 0; l < n_x; ++l) x(l) = coord(rng);
      for (int l = 0; l < n_u; ++l) u(l) = coord(rng);
      Vec y = exp.eval(hp, x, u);
      for (int i = 0; i < n_x; ++i) y(i) += hp.sigma_w(i) * unit(rng);
      data.append(x, u, y);
    }
    const GpModel model = GpModel::fit(data, hp);
    for (int q = 0; q < n_queries; ++q) {
      Vec x(n_x), u(n_u);
      for (int l = 0; l < n_x; ++l) x(l) = coord(rng);
      for (int l = 0; l < n_u; ++l) u(l) = coord(rng);
      const Vec truth = exp.eval(hp, x, u);
      const IntervalBox box = enclosure(model, x, u);
      if (!box.contains(truth, 1e-9)) ++violations;
    }
  }
  res.passed = violations == 0;
  res.detail = std::to_string(violations) + " violations over " +
               std::to_string(n_functions * n_queries) + " queries";
  return res;
}

SuiteResult check_duality(std::uint64_t seed, int n_pairs) {
  SuiteResult res{"interior_dilation_duality", true, ""};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_frac(0.2, 0.9);
  std::uniform_real_distribution<double> member(0.0, 1.0);
  std::uniform_int_distribution<int> dim_d(1, 2);
  for (int t = 0; t < n_pairs; ++t) {
    const int n = dim_d(rng);
    const Hyperparams hp = random_hyperparams(rng, n, 1);
    const MetricContext ctx = MetricContext::from_hyperparams(hp);
    const Vec eta = Vec::Constant(n, 0.4);
    const Vec lo = Vec::Constant(n, -2.0), hi = Vec::Constant(n, 2.0);
    const Lattice lat(eta, lo, hi);
    Vec radii(n);
    for (int i = 0; i < n; ++i)
      radii(i) = gamma_frac(rng) * std::sqrt(2.0) * hp.alpha(i) * 0.6;

    IndexSet set(lat.size());
    for (long idx = 0; idx < lat.size(); ++idx)
      if (member(rng) < 0.5) set.insert(idx);

    // Brute-force oracle directly from the ball definition, scanning all
    // lattice point pairs.
    auto in_ball = [&](long a, long b2, int i) {
      const double r2 = metric_radius_sqnorm(ctx, radii(i), i);
      Vec d = lat.point(a) - lat.point(b2);
      const double s = ctx.weighted_sqnorm(d, i);
      return s <= r2 * (1.0 + 1e-12) + 1e-15;
    };
    auto near_domain_edge = [&](long a, int i) {
      // A ball around a that pokes outside the represented domain.
      const double r2 = metric_radius_sqnorm(ctx, radii(i), i);
      const double r = std::sqrt(r2);
      const auto z = lat.coords_of(a);
      for (int l = 0; l < n; ++l) {
        const int reach =
            static_cast<int>(std::floor(r * ctx.length_scales_x(i, l) / lat.spacing()(l) + 1e-9));
        if (z[l] - reach < lat.coord_min(l) || z[l] + reach > lat.coord_max(l)) {
          // Check exactly: some offset within the ball leaves the range.
          for (const auto& o : metric_ball_offsets(lat, ctx, radii(i), i)) {
            std::vector<int> q(n);
            for (int m2 = 0; m2 < n; ++m2) q[m2] = z[m2] + o[m2];
            if (!lat.in_range(q)) return true;
          }
          return false;
        }
      }
      return false;
    };

    IndexSet int_oracle(lat.size());
    for (long a = 0; a < lat.size(); ++a) {
      if (!set.contains(a)) continue;
      bool inside = true;
      for (int i = 0; i < n && inside; ++i) {
        if (near_domain_edge(a, i)) inside = false;
        for (long b2 = 0; b2 < lat.size() && inside; ++b2)
          if (in_ball(a, b2, i) && !set.contains(b2)) inside = false;
      }
      if (inside) int_oracle.insert(a);
    }
    IndexSet out_oracle(lat.size());
    for (long a = 0; a < lat.size(); ++a) {
      bool hit = false;
      for (int i = 0; i < n && !hit; ++i)
        for (long b2 = 0; b2 < lat.size() && !hit; ++b2)
          if (set.contains(b2) && in_ball(a, b2, i)) hit = true;
      if (hit) out_oracle.insert(a);
    }

    if (!(int_shrink(lat, ctx, set, radii) == int_oracle) ||
        !(out_grow(lat, ctx, set, radii) == out_oracle)) {
      res.passed = false;
      res.detail = "oracle mismatch at pair " + std::to_string(t);
      return res;
    }

    // Complement duality Int(S) = domain \ Out(domain \ S), where points
    // outside the domain count as complement members.
    IndexSet comp(lat.size());
    for (long a = 0; a < lat.size(); ++a)
      if (!set.contains(a)) comp.insert(a);
    bool overflow = false;
    IndexSet grown = out_grow(lat, ctx, comp, radii, &overflow);
    IndexSet dual(lat.size());
    for (long a = 0; a < lat.size(); ++a)
      if (!grown.contains(a)) dual.insert(a);
    // Points whose ball leaves the domain must also be removed to match the
    // interior's convention.
    for (long a : dual.indices())
      for (int i = 0; i < n; ++i)
        if (near_domain_edge(a, i)) {
          dual.erase(a);
          break;
        }
    if (!(dual == int_shrink(lat, ctx, set, radii))) {
      res.passed = false;
      res.detail = "complement duality failed at pair " + std::to_string(t);
      return res;
    }
  }
  res.detail = std::to_string(n_pairs) + " set pairs, exact";
  return res;
}

SuiteResult check_game_oracle(std::uint64_t seed, int n_systems, int max_states,
                              int max_inputs) {
  SuiteResult res{"safety_game_oracle", true, ""};
  std::mt19937_64 rng(seed);
  for (int t = 0; t < n_systems; ++t) {
    std::uniform_int_distribution<int> ns_d(5, max_states);
    std::uniform_int_distribution<int> nu_d(1, max_inputs);
    const int ns = ns_d(rng);
    const int nu = nu_d(rng);
    std::uniform_int_distribution<int> succ_count(0, 4);
    std::uniform_int_distribution<int> state_d(0, ns - 1);
    std::uniform_real_distribution<double> member(0.0, 1.0);

    std::vector<std::vector<std::vector<long>>> succ(ns,
                                                     std::vector<std::vector<long>>(nu));
    for (int s = 0; s < ns; ++s)
      for (int u = 0; u < nu; ++u) {
        const int m = succ_count(rng);
        for (int a = 0; a < m; ++a) succ[s][u].push_back(state_d(rng));
      }
    IndexSet q0(ns);
    for (int s = 0; s < ns; ++s)
      if (member(rng) < 0.7) q0.insert(s);

    const IndexSet fp = safety_game_fixed_point(
        ns, nu, q0, [&](long s, int u) { return !succ[s][u].empty(); },
        [&](long s, int u, const IndexSet& q) {
          for (long p : succ[s][u])
            if (!q.contains(p)) return false;
          return true;
        });

    // Independent worklist solver: per-pair counters of successors outside
    // the candidate set; removals propagate backward over a predecessor map.
    std::vector<std::vector<std::pair<long, int>>> preds(ns);
    std::vector<std::vector<long>> bad(ns, std::vector<long>(nu, 0));
    for (int s = 0; s < ns; ++s)
      for (int u = 0; u < nu; ++u)
        for (long p : succ[s][u]) {
          preds[p].push_back({s, u});
          if (!q0.contains(p)) ++bad[s][u];
        }
    std::vector<uint8_t> alive(ns, 0);
    for (int s = 0; s < ns; ++s) alive[s] = q0.contains(s) ? 1 : 0;
    std::deque<long> work;
    auto has_move = [&](long s) {
      for (int u = 0; u < nu; ++u)
        if (!succ[s][u].empty() && bad[s][u] == 0) return true;
      return false;
    };
    for (int s = 0; s < ns; ++s)
      if (alive[s] && !has_move(s)) work.push_back(s);
    while (!work.empty()) {
      const long s = work.front();
      work.pop_front();
      if (!alive[s]) continue;
      alive[s] = 0;
      for (auto [p, u] : preds[s]) {
        ++bad[p][u];
        if (alive[p] && !has_move(p)) work.push_back(p);
      }
    }
    IndexSet oracle(ns);
    for (int s = 0; s < ns; ++s)
      if (alive[s]) oracle.insert(s);

    if (!(fp == oracle)) {
      res.passed = false;
      res.detail = "fixed-point mismatch at system " + std::to_string(t);
      return res;
    }
  }
  res.detail = std::to_string(n_systems) + " random transition systems";
  return res;
}

SuiteResult check_gp_step_oracle(std::uint64_t seed, int n_instances, double tol) {
  SuiteResult res{"threshold_program_oracle", true, ""};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_d(1, 4);
  std::uniform_real_distribution<double> c_d(0.1, 2.0);
  std::uniform_real_distribution<double> delta_d(0.0, 0.4);
  const double margin = 1e-3;
  for (int t = 0; t < n_instances; ++t) {
    const int n = dim_d(rng);
    const Hyperparams hp = random_hyperparams(rng, n, 1);
    Vec delta_hat(n), c_next(n);
    for (int i = 0; i < n; ++i) {
      delta_hat(i) = delta_d(rng) * hp.b(i);
      c_next(i) = c_d(rng);
    }
    const StepSolution sol = solve_gp_step(hp, delta_hat, c_next, margin);

    // Zooming grid search on psi.
    Vec lo(n), hi(n);
    bool box_ok = true;
    for (int i = 0; i < n; ++i) {
      lo(i) = delta_hat(i) / hp.b(i);
      hi(i) = std::sqrt(2.0) * hp.alpha(i) - margin;
      if (lo(i) > hi(i)) box_ok = false;
    }
    auto norm_ok = [&](const Vec& psi) {
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          const double v = hp.b(l) * psi(l) / hp.length_scales(i, l);
          s += v * v;
        }
        if (s > c_next(i) * c_next(i) * (1.0 + 1e-12)) return false;
      }
      return true;
    };
    bool oracle_feasible = box_ok && norm_ok(lo);
    if (oracle_feasible != sol.feasible) {
      res.passed = false;
      res.detail = "feasibility mismatch at instance " + std::to_string(t);
      return res;
    }
    if (!oracle_feasible) continue;

    const int grid = (n <= 2) ? 33 : (n == 3 ? 17 : 11);
    Vec best = lo;
    double best_obj = -std::numeric_limits<double>::infinity();
    Vec win_lo = lo, win_hi = hi;
    for (int pass = 0; pass < 5; ++pass) {
      std::vector<int> idx(n, 0);
      while (true) {
        Vec psi(n);
        for (int i = 0; i < n; ++i)
          psi(i) = win_lo(i) + (win_hi(i) - win_lo(i)) * idx[i] / (grid - 1);
        bool in_box = true;
        for (int i = 0; i < n; ++i)
          if (psi(i) < lo(i) || psi(i) > hi(i)) in_box = false;
        if (in_box && norm_ok(psi)) {
          double obj = 0.0;
          for (int i = 0; i < n; ++i) obj += std::log(std::max(psi(i), 1e-300));
          if (obj > best_obj) {
            best_obj = obj;
            best = psi;
          }
        }
        int l = n - 1;
        while (l >= 0 && idx[l] == grid - 1) {
          idx[l] = 0;
          --l;
        }
        if (l < 0) break;
        ++idx[l];
      }
      for (int i = 0; i < n; ++i) {
        const double cell = (win_hi(i) - win_lo(i)) / (grid - 1);
        win_lo(i) = std::max(lo(i), best(i) - 1.5 * cell);
        win_hi(i) = std::min(hi(i), best(i) + 1.5 * cell);
      }
    }
    const double obj_impl = sol.psi.array().max(1e-300).log().sum();
    const double gap = (std::exp(best_obj) - std::exp(obj_impl)) /
                       std::max(std::exp(best_obj), 1e-12);
    if (gap > tol) {
      std::ostringstream os;
      os << "objective gap " << gap << " at instance " << t;
      res.passed = false;
      res.detail = os.str();
      return res;
    }
  }
  res.detail = std::to_string(n_instances) + " random instances";
  return res;
}

std::vector<SuiteResult> run_all_checks(std::uint64_t seed) {
  return {
      check_metric_axioms(seed, 1000),
      check_containment(seed + 1, 20, 200),
      check_duality(seed + 2, 40),
      check_game_oracle(seed + 3, 25, 200, 6),
      check_gp_step_oracle(seed + 4, 50, 1e-3),
  };
}

}  // namespace etmpc
