#include "etmpc/lattice.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace etmpc {

namespace {
constexpr double kTieTol = 1e-9;
}

Lattice::Lattice(const Vec& eta, const Vec& domain_lo, const Vec& domain_hi)
    : n_(static_cast<int>(eta.size())), eta_(eta) {
  if (domain_lo.size() != n_ || domain_hi.size() != n_)
    throw std::invalid_argument("Lattice: dimension mismatch");
  if ((eta.array() <= 0.0).any()) throw std::invalid_argument("Lattice: eta must be positive");
  spacing_ = eta * (2.0 / std::sqrt(static_cast<double>(n_)));
  z_min_.resize(n_);
  z_max_.resize(n_);
  for (int l = 0; l < n_; ++l) {
    z_min_[l] = static_cast<int>(std::ceil(domain_lo(l) / spacing_(l) - kTieTol));
    z_max_[l] = static_cast<int>(std::floor(domain_hi(l) / spacing_(l) + kTieTol));
    if (z_min_[l] > z_max_[l]) throw std::invalid_argument("Lattice: empty axis");
  }
  stride_.resize(n_);
  long s = 1;
  for (int l = n_ - 1; l >= 0; --l) {
    stride_[l] = s;
    s *= extent(l);
  }
  size_ = s;
}

long Lattice::index_of(const std::vector<int>& z) const {
  long idx = 0;
  for (int l = 0; l < n_; ++l) idx += static_cast<long>(z[l] - z_min_[l]) * stride_[l];
  return idx;
}

std::vector<int> Lattice::coords_of(long idx) const {
  std::vector<int> z(n_);
  for (int l = 0; l < n_; ++l) {
    z[l] = static_cast<int>(idx / stride_[l]) + z_min_[l];
    idx %= stride_[l];
  }
  return z;
}

Vec Lattice::point(const std::vector<int>& z) const {
  Vec x(n_);
  for (int l = 0; l < n_; ++l) x(l) = z[l] * spacing_(l);
  return x;
}

Vec Lattice::point(long idx) const { return point(coords_of(idx)); }

bool Lattice::in_range(const std::vector<int>& z) const {
  for (int l = 0; l < n_; ++l)
    if (z[l] < z_min_[l] || z[l] > z_max_[l]) return false;
  return true;
}

std::vector<int> Lattice::nearest(const Vec& x) const {
  std::vector<int> z(n_);
  for (int l = 0; l < n_; ++l) {
    int zi = static_cast<int>(std::lround(x(l) / spacing_(l)));
    z[l] = std::clamp(zi, z_min_[l], z_max_[l]);
  }
  return z;
}

bool Lattice::coord_range(const Vec& lo, const Vec& hi, std::vector<int>& z_lo,
                          std::vector<int>& z_hi) const {
  z_lo.resize(n_);
  z_hi.resize(n_);
  for (int l = 0; l < n_; ++l) {
    z_lo[l] = std::max(z_min_[l], static_cast<int>(std::ceil(lo(l) / spacing_(l) - kTieTol)));
    z_hi[l] = std::min(z_max_[l], static_cast<int>(std::floor(hi(l) / spacing_(l) + kTieTol)));
    if (z_lo[l] > z_hi[l]) return false;
  }
  return true;
}

bool IndexSet::subset_of(const IndexSet& o) const {
  for (size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i] && !o.mask_[i]) return false;
  return true;
}

std::vector<long> IndexSet::indices() const {
  std::vector<long> out;
  out.reserve(count_);
  for (size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) out.push_back(static_cast<long>(i));
  return out;
}

std::vector<std::vector<int>> metric_ball_offsets(const Lattice& lat, const MetricContext& ctx,
                                                  double gamma, int i) {
  const int n = lat.dim();
  const double r2 = metric_radius_sqnorm(ctx, gamma, i);
  const double r = std::sqrt(r2);
  std::vector<int> max_off(n);
  for (int l = 0; l < n; ++l)
    max_off[l] = static_cast<int>(std::floor(r * ctx.length_scales_x(i, l) / lat.spacing()(l) +
                                             kTieTol));
  std::vector<std::vector<int>> out;
  std::vector<int> o(n, 0);
  // Odometer enumeration over the bounding box of the ellipsoid.
  for (int l = 0; l < n; ++l) o[l] = -max_off[l];
  while (true) {
    double s = 0.0;
    for (int l = 0; l < n; ++l) {
      const double d = o[l] * lat.spacing()(l) / ctx.length_scales_x(i, l);
      s += d * d;
    }
    if (s <= r2 * (1.0 + 1e-12) + 1e-15) out.push_back(o);
    int l = n - 1;
    while (l >= 0 && o[l] == max_off[l]) {
      o[l] = -max_off[l];
      --l;
    }
    if (l < 0) break;
    ++o[l];
  }
  return out;
}

IndexSet int_shrink(const Lattice& lat, const MetricContext& ctx, const IndexSet& set,
                    const Vec& radii) {
  IndexSet out = set;
  std::vector<int> q(lat.dim());
  for (int i = 0; i < ctx.n_x; ++i) {
    const auto offsets = metric_ball_offsets(lat, ctx, radii(i), i);
    for (long idx : set.indices()) {
      if (!out.contains(idx)) continue;
      const auto z = lat.coords_of(idx);
      for (const auto& o : offsets) {
        bool inside = true;
        for (int l = 0; l < lat.dim(); ++l) q[l] = z[l] + o[l];
        if (!lat.in_range(q))
          inside = false;
        else if (!set.contains(lat.index_of(q)))
          inside = false;
        if (!inside) {
          out.erase(idx);
          break;
        }
      }
    }
  }
  return out;
}

IndexSet out_grow(const Lattice& lat, const MetricContext& ctx, const IndexSet& set,
                  const Vec& radii, bool* overflow) {
  IndexSet out(lat.size());
  if (overflow) *overflow = false;
  std::vector<int> q(lat.dim());
  for (int i = 0; i < ctx.n_x; ++i) {
    const auto offsets = metric_ball_offsets(lat, ctx, radii(i), i);
    for (long idx : set.indices()) {
      const auto z = lat.coords_of(idx);
      for (const auto& o : offsets) {
        for (int l = 0; l < lat.dim(); ++l) q[l] = z[l] + o[l];
        if (lat.in_range(q))
          out.insert(lat.index_of(q));
        else if (overflow)
          *overflow = true;
      }
    }
  }
  return out;
}

std::string set_to_text(const Lattice& lat, const IndexSet& set) {
  std::ostringstream out;
  for (long idx : set.indices()) {
    const auto z = lat.coords_of(idx);
    for (int l = 0; l < lat.dim(); ++l) out << z[l] << (l + 1 < lat.dim() ? " " : "");
    out << "\n";
  }
  return out.str();
}

IndexSet set_from_text(const Lattice& lat, const std::string& text) {
  IndexSet set(lat.size());
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<int> z(lat.dim());
    for (int l = 0; l < lat.dim(); ++l) ls >> z[l];
    if (!lat.in_range(z)) throw std::runtime_error("set_from_text: coordinate out of range");
    set.insert(lat.index_of(z));
  }
  return set;
}

}  // namespace etmpc
