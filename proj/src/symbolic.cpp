#include "etmpc/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace etmpc {

namespace {
constexpr double kTieTol = 1e-9;

// n-dimensional inclusive prefix sums over a dense lattice mask, with
// O(2^n) box-count queries via inclusion-exclusion.
class PrefixSum {
 public:
  PrefixSum(const Lattice& lat, const IndexSet& set) : lat_(&lat) {
    const int n = lat.dim();
    const long size = lat.size();
    sums_.resize(size);
    for (long idx = 0; idx < size; ++idx) sums_[idx] = set.contains(idx) ? 1 : 0;
    stride_.resize(n);
    extent_.resize(n);
    long s = 1;
    for (int l = n - 1; l >= 0; --l) {
      stride_[l] = s;
      extent_[l] = lat.extent(l);
      s *= extent_[l];
    }
    for (int l = 0; l < n; ++l) {
      for (long idx = 0; idx < size; ++idx) {
        const long c = (idx / stride_[l]) % extent_[l];
        if (c > 0) sums_[idx] += sums_[idx - stride_[l]];
      }
    }
  }

  // Number of set members with coordinates in the closed box [z_lo, z_hi]
  // (absolute lattice coordinates, assumed within range).
  long box_count(const std::vector<int>& z_lo, const std::vector<int>& z_hi) const {
    const int n = lat_->dim();
    long total = 0;
    for (unsigned corner = 0; corner < (1u << n); ++corner) {
      long idx = 0;
      int sign = 1;
      bool zero = false;
      for (int l = 0; l < n; ++l) {
        long c;
        if (corner & (1u << l)) {
          c = static_cast<long>(z_lo[l] - lat_->coord_min(l)) - 1;
          sign = -sign;
        } else {
          c = static_cast<long>(z_hi[l] - lat_->coord_min(l));
        }
        if (c < 0) {
          zero = true;
          break;
        }
        idx += c * stride_[l];
      }
      if (!zero) total += sign * sums_[idx];
    }
    return total;
  }

 private:
  const Lattice* lat_;
  std::vector<long> sums_;
  std::vector<long> stride_;
  std::vector<long> extent_;
};

long box_volume(const std::vector<int>& z_lo, const std::vector<int>& z_hi) {
  long v = 1;
  for (size_t l = 0; l < z_lo.size(); ++l) v *= z_hi[l] - z_lo[l] + 1;
  return v;
}

// Exact Euclidean distance transform on the lattice (squared distances,
// separable lower-envelope passes per axis).
std::vector<float> distance_field(const Lattice& lat, const IndexSet& targets) {
  const int n = lat.dim();
  const long size = lat.size();
  const double inf = std::numeric_limits<double>::infinity();
  const double far = 1e30;  // finite sentinel keeps the envelope recursion simple
  std::vector<double> d2(size);
  for (long idx = 0; idx < size; ++idx) d2[idx] = targets.contains(idx) ? 0.0 : far;

  std::vector<long> stride(n);
  long s = 1;
  for (int l = n - 1; l >= 0; --l) {
    stride[l] = s;
    s *= lat.extent(l);
  }

  std::vector<double> f, g;
  std::vector<int> v;
  std::vector<double> zb;
  for (int l = 0; l < n; ++l) {
    const int m = lat.extent(l);
    const double h = lat.spacing()(l);
    f.resize(m);
    g.resize(m);
    v.resize(m);
    zb.resize(m + 1);
    for (long base = 0; base < size; ++base) {
      if ((base / stride[l]) % m != 0) continue;
      for (int q = 0; q < m; ++q) f[q] = d2[base + q * stride[l]];
      int k = 0;
      v[0] = 0;
      zb[0] = -inf;
      zb[1] = inf;
      for (int q = 1; q < m; ++q) {
        while (true) {
          const double sx = (f[q] - f[v[k]] + h * h * (double(q) * q - double(v[k]) * v[k])) /
                            (2.0 * h * h * (q - v[k]));
          if (sx <= zb[k] && k > 0) {
            --k;
          } else {
            if (sx <= zb[k]) {
              v[0] = q;
            } else {
              ++k;
              v[k] = q;
              zb[k] = sx;
            }
            zb[k + 1] = inf;
            break;
          }
        }
      }
      k = 0;
      for (int q = 0; q < m; ++q) {
        while (zb[k + 1] < q) ++k;
        const double dq = h * (q - v[k]);
        g[q] = f[v[k]] + dq * dq;
      }
      for (int q = 0; q < m; ++q) d2[base + q * stride[l]] = g[q];
    }
  }

  std::vector<float> out(size);
  for (long idx = 0; idx < size; ++idx)
    out[idx] = (d2[idx] == inf) ? std::numeric_limits<float>::max()
                                : static_cast<float>(std::sqrt(d2[idx]));
  return out;
}

}  // namespace

Vec epsilon_lower_bound(const Hyperparams& hp, const Vec& eta_x) {
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  Vec out(hp.n_x);
  for (int i = 0; i < hp.n_x; ++i)
    out(i) = metric_of_sqnorm(hp.alpha(i), ctx.weighted_sqnorm(eta_x, i));
  return out;
}

Vec contractive_radii(const Hyperparams& hp, const Vec& eta_x, const std::vector<int>& z_ints) {
  if (static_cast<int>(z_ints.size()) != hp.n_x)
    throw std::invalid_argument("contractive_radii: z_ints size mismatch");
  const MetricContext ctx = MetricContext::from_hyperparams(hp);
  const double n = static_cast<double>(hp.n_x);
  Vec out(hp.n_x);
  for (int i = 0; i < hp.n_x; ++i) {
    if (z_ints[i] < 1) throw std::invalid_argument("contractive_radii: z_i must be >= 1");
    const double s = (4.0 * z_ints[i] * z_ints[i] / n) * ctx.weighted_sqnorm(eta_x, i);
    out(i) = metric_of_sqnorm(hp.alpha(i), s);
  }
  return out;
}

SymbolicModel::SymbolicModel(const GpModel& model, const SymbolicParams& params) {
  const Hyperparams& hp = model.hyperparams();
  ctx_ = MetricContext::from_hyperparams(hp);
  state_lat_ = std::make_shared<Lattice>(params.eta_x, params.spec_lo, params.spec_hi);

  // Input lattice: all quantized input points inside U.
  Lattice input_lat(params.eta_u, params.input_lo, params.input_hi);
  inputs_.reserve(input_lat.size());
  for (long ui = 0; ui < input_lat.size(); ++ui) inputs_.push_back(input_lat.point(ui));
  if (inputs_.empty()) throw std::runtime_error("SymbolicModel: empty input lattice");

  const Vec eps_lb = epsilon_lower_bound(hp, params.eta_x);
  if (params.epsilon_override) {
    epsilon_ = *params.epsilon_override;
    for (int i = 0; i < hp.n_x; ++i) {
      if (epsilon_(i) < eps_lb(i) - 1e-12 ||
          epsilon_(i) >= std::sqrt(2.0) * hp.alpha(i))
        throw std::invalid_argument("SymbolicModel: epsilon outside admissible interval");
    }
  } else {
    epsilon_ = eps_lb;
  }
  gamma_tilde_ = contractive_radii(hp, params.eta_x, params.z_ints);

  const int n = hp.n_x;
  const int nu = static_cast<int>(inputs_.size());
  const long ns = state_lat_->size();
  box_lo_.assign(static_cast<size_t>(ns) * nu * n, 0);
  box_hi_.assign(static_cast<size_t>(ns) * nu * n, 0);
  blocked_.assign(static_cast<size_t>(ns) * nu, 0);

  Vec margin(n);
  for (int i = 0; i < n; ++i) margin(i) = hp.b(i) * epsilon_(i) + params.eta_x(i);

  gamma_bar_lattice_ = Vec::Zero(n);
  const Vec& sp = state_lat_->spacing();

  Mat xs(ns, n);
  for (long s = 0; s < ns; ++s) xs.row(s) = state_lat_->point(s).transpose();
  Mat us(nu, hp.n_u);
  for (int u = 0; u < nu; ++u) us.row(u) = inputs_[u].transpose();

  std::vector<Mat> mu(n);
  for (int i = 0; i < n; ++i) mu[i] = model.mean_grid(xs, us, i);

  // Candidate selection: per state, keep the inputs whose mean successor has
  // the smallest worst-axis reach (in cell units); everything else is blocked.
  const int keep_n = (params.candidate_inputs > 0 && params.candidate_inputs < nu)
                         ? params.candidate_inputs
                         : nu;
  std::vector<std::vector<long>> states_of(nu);
  if (keep_n == nu) {
    for (int u = 0; u < nu; ++u) {
      states_of[u].resize(ns);
      for (long s = 0; s < ns; ++s) states_of[u][s] = s;
    }
  } else {
    std::fill(blocked_.begin(), blocked_.end(), 1);
    // Union of per-axis specialists (best at recentering that axis) and
    // all-round inputs (smallest worst-axis reach); a single scalar score
    // starves the weakly controllable axes of their best inputs.
    const int per = std::max(1, keep_n / (n + 1));
    std::vector<std::pair<double, int>> score(nu);
    std::vector<char> chosen(nu);
    for (long s = 0; s < ns; ++s) {
      std::fill(chosen.begin(), chosen.end(), 0);
      const auto take = [&](const std::function<double(int)>& key) {
        for (int u = 0; u < nu; ++u) score[u] = {key(u), u};
        std::nth_element(score.begin(), score.begin() + per, score.end());
        for (int j = 0; j < per; ++j) chosen[score[j].second] = 1;
      };
      for (int i = 0; i < n; ++i)
        take([&](int u) { return std::abs(mu[i](s, u)); });
      take([&](int u) {
        double reach = 0.0;
        for (int i = 0; i < n; ++i)
          reach = std::max(reach, std::abs(mu[i](s, u)) / sp(i));
        return reach;
      });
      for (int u = 0; u < nu; ++u)
        if (chosen[u]) states_of[u].push_back(s);
    }
  }

  for (int u = 0; u < nu; ++u) {
    const std::vector<long>& rows = states_of[u];
    if (rows.empty()) continue;
    Mat sub(static_cast<long>(rows.size()), n);
    for (size_t r = 0; r < rows.size(); ++r) sub.row(r) = xs.row(rows[r]);
    Mat sig(static_cast<long>(rows.size()), n);
    for (int i = 0; i < n; ++i) sig.col(i) = model.sigma_states(sub, inputs_[u], i);
    for (size_t r = 0; r < rows.size(); ++r) {
      const long s = rows[r];
      const Vec dvec = model.beta().cwiseProduct(sig.row(r).transpose()) + hp.sigma_w;
      const Vec half = dvec + margin;
      for (int i = 0; i < n; ++i) {
        const double g = metric_of_sqnorm(hp.alpha(i), ctx_.weighted_sqnorm(dvec, i));
        if (g > gamma_bar_lattice_(i)) gamma_bar_lattice_(i) = g;
      }
      const size_t base = (static_cast<size_t>(s) * nu + u) * n;
      bool ok = true;
      for (int l = 0; l < n; ++l) {
        const double lo = mu[l](s, u) - half(l);
        const double hi = mu[l](s, u) + half(l);
        const long zl = static_cast<long>(std::ceil(lo / sp(l) - kTieTol));
        const long zh = static_cast<long>(std::floor(hi / sp(l) + kTieTol));
        if (zl < state_lat_->coord_min(l) || zh > state_lat_->coord_max(l)) {
          ok = false;
          break;
        }
        box_lo_[base + l] = static_cast<int16_t>(zl);
        box_hi_[base + l] = static_cast<int16_t>(zh);
      }
      blocked_[static_cast<size_t>(s) * nu + u] = ok ? 0 : 1;
    }
  }

  gamma_bar_plateau_.resize(n);
  const Vec plateau = model.beta().cwiseProduct(hp.alpha) + hp.sigma_w;
  for (int i = 0; i < n; ++i)
    gamma_bar_plateau_(i) = metric_of_sqnorm(hp.alpha(i), ctx_.weighted_sqnorm(plateau, i));
}

void SymbolicModel::successor_range(long s, int u, std::vector<int>& lo,
                                    std::vector<int>& hi) const {
  const int n = state_lat_->dim();
  const size_t base = (static_cast<size_t>(s) * num_inputs() + u) * n;
  lo.assign(box_lo_.begin() + base, box_lo_.begin() + base + n);
  hi.assign(box_hi_.begin() + base, box_hi_.begin() + base + n);
}

std::vector<long> SymbolicModel::successors(long s, int u) const {
  std::vector<long> out;
  if (blocked(s, u)) return out;
  std::vector<int> lo, hi;
  successor_range(s, u, lo, hi);
  const int n = state_lat_->dim();
  std::vector<int> z = lo;
  while (true) {
    out.push_back(state_lat_->index_of(z));
    int l = n - 1;
    while (l >= 0 && z[l] == hi[l]) {
      z[l] = lo[l];
      --l;
    }
    if (l < 0) break;
    ++z[l];
  }
  return out;
}

IndexSet safety_game_fixed_point(
    long n_states, int n_inputs, const IndexSet& q0,
    const std::function<bool(long, int)>& enabled,
    const std::function<bool(long, int, const IndexSet&)>& contained) {
  (void)n_states;
  IndexSet q = q0;
  while (true) {
    IndexSet next = q;
    for (long s : q.indices()) {
      bool keep = false;
      for (int u = 0; u < n_inputs && !keep; ++u)
        if (enabled(s, u) && contained(s, u, q)) keep = true;
      if (!keep) next.erase(s);
    }
    if (next == q) return q;
    q = next;
  }
}

SafeSynthesis SafeSynthesis::run(const GpModel& model, const SymbolicParams& params) {
  SafeSynthesis out;
  out.sym_ = std::make_shared<SymbolicModel>(model, params);
  const SymbolicModel& sym = *out.sym_;
  const Lattice& lat = sym.state_lattice();
  const MetricContext& ctx = sym.metric();
  const int n = lat.dim();
  const int nu = sym.num_inputs();

  out.gamma_ = params.gamma_override ? *params.gamma_override : sym.gamma_tilde();
  for (int i = 0; i < n; ++i) {
    if (out.gamma_(i) > sym.gamma_tilde()(i) + 1e-12)
      throw std::invalid_argument("SafeSynthesis: gamma exceeds the contraction radius");
    if (out.gamma_(i) < sym.gamma_bar_lattice()(i) - 1e-12) {
      // The feasibility-side assumption gamma >= max d_i(0, delta_N) fails;
      // synthesis itself stays sound, so record it instead of failing.
      out.gamma_assumption_ok_ = false;
      std::ostringstream os;
      os << "data too uncertain for contractive synthesis in dim " << i
         << ": needs gamma >= " << sym.gamma_bar_lattice()(i) << ", have " << out.gamma_(i)
         << " (gamma_tilde " << sym.gamma_tilde()(i) << "); ";
      out.gamma_report_ += os.str();
    }
  }

  // Q0: quantization of the continuous epsilon-interior of the spec box.
  Vec shrink = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double r = std::sqrt(metric_radius_sqnorm(ctx, sym.epsilon()(i), i));
    for (int l = 0; l < n; ++l) shrink(l) = std::max(shrink(l), r * ctx.length_scales_x(i, l));
  }
  std::vector<int> q_lo, q_hi;
  IndexSet q0(lat.size());
  if (lat.coord_range(params.spec_lo + shrink, params.spec_hi - shrink, q_lo, q_hi)) {
    std::vector<int> z = q_lo;
    while (true) {
      q0.insert(lat.index_of(z));
      int l = n - 1;
      while (l >= 0 && z[l] == q_hi[l]) {
        z[l] = q_lo[l];
        --l;
      }
      if (l < 0) break;
      ++z[l];
    }
  }

  // Pre via the interior form: all plain successors inside Int(Q; gamma_tilde).
  IndexSet q = q0;
  std::vector<int> lo(n), hi(n);
  while (true) {
    const IndexSet interior = int_shrink(lat, ctx, q, sym.gamma_tilde());
    PrefixSum ps(lat, interior);
    IndexSet next = q;
    for (long s : q.indices()) {
      bool keep = false;
      for (int u = 0; u < nu && !keep; ++u) {
        if (sym.blocked(s, u)) continue;
        sym.successor_range(s, u, lo, hi);
        if (ps.box_count(lo, hi) == box_volume(lo, hi)) keep = true;
      }
      if (!keep) next.erase(s);
    }
    if (next == q) break;
    q = next;
  }
  out.fixed_point_ = q;
  out.terminal_ = int_shrink(lat, ctx, q, sym.gamma_tilde());

  if (!q.empty()) {
    PrefixSum ps(lat, out.terminal_);
    for (long s : q.indices()) {
      std::vector<int>& adm = out.controller_[s];
      for (int u = 0; u < nu; ++u) {
        if (sym.blocked(s, u)) continue;
        sym.successor_range(s, u, lo, hi);
        if (ps.box_count(lo, hi) == box_volume(lo, hi)) adm.push_back(u);
      }
      if (adm.empty())
        throw std::logic_error("SafeSynthesis: fixed-point state without admissible input");
    }
  }
  if (out.fixed_point_.empty() == false && out.terminal_.empty())
    throw std::runtime_error("SafeSynthesis: terminal set empty after shrink");

  out.terminal_dist_ = distance_field(lat, out.terminal_);
  return out;
}

long SafeSynthesis::related_state(const Vec& x, const IndexSet& within, bool* found) const {
  const Lattice& lat = sym_->state_lattice();
  const MetricContext& ctx = sym_->metric();
  const int n = lat.dim();
  Vec half = Vec::Constant(n, std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) {
    const double r = std::sqrt(metric_radius_sqnorm(ctx, sym_->epsilon()(i), i));
    for (int l = 0; l < n; ++l) half(l) = std::min(half(l), r * ctx.length_scales_x(i, l));
  }
  std::vector<int> z_lo, z_hi;
  *found = false;
  if (!lat.coord_range(x - half, x + half, z_lo, z_hi)) return -1;
  long best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<int> z = z_lo;
  while (true) {
    const long idx = lat.index_of(z);
    if (within.contains(idx)) {
      const Vec p = lat.point(idx);
      double score = 0.0;
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        const double d = kernel_metric(ctx, p, x, i);
        if (d > sym_->epsilon()(i) * (1.0 + 1e-12)) {
          ok = false;
          break;
        }
        score = std::max(score, d / sym_->epsilon()(i));
      }
      if (ok && score < best_score) {
        best_score = score;
        best = idx;
      }
    }
    int l = n - 1;
    while (l >= 0 && z[l] == z_hi[l]) {
      z[l] = z_lo[l];
      --l;
    }
    if (l < 0) break;
    ++z[l];
  }
  *found = best >= 0;
  return best;
}

bool SafeSynthesis::in_safe_set(const Vec& x) const {
  bool found = false;
  related_state(x, fixed_point_, &found);
  return found;
}

bool SafeSynthesis::in_terminal_set(const Vec& x) const {
  bool found = false;
  related_state(x, terminal_, &found);
  return found;
}

Vec SafeSynthesis::control(const Vec& x) const {
  bool found = false;
  const long s = related_state(x, fixed_point_, &found);
  if (!found) throw std::runtime_error("SafeSynthesis::control: state outside the safe set");
  const std::vector<int>& adm = controller_.at(s);
  return sym_->input_point(adm.front());
}

double SafeSynthesis::terminal_distance(const Vec& x) const {
  const Lattice& lat = sym_->state_lattice();
  const std::vector<int> z = lat.nearest(x);
  const long idx = lat.index_of(z);
  return terminal_dist_[idx] + (x - lat.point(idx)).norm();
}

std::string SafeSynthesis::serialize() const {
  const Lattice& lat = sym_->state_lattice();
  std::ostringstream out;
  out << "fixed_point\n" << set_to_text(lat, fixed_point_);
  out << "terminal\n" << set_to_text(lat, terminal_);
  return out.str();
}

}  // namespace etmpc
