#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "etmpc/bounds.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

// Uniform lattice over an axis-aligned domain box. Points sit at
// x_l = z_l * (2/sqrt(n)) * eta_l for integer z_l; only the integer
// coordinates whose point lies in the domain are represented.
class Lattice {
 public:
  Lattice(const Vec& eta, const Vec& domain_lo, const Vec& domain_hi);

  int dim() const { return n_; }
  long size() const { return size_; }
  const Vec& spacing() const { return spacing_; }
  const Vec& eta() const { return eta_; }

  // Integer coordinate bounds per axis.
  int coord_min(int l) const { return z_min_[l]; }
  int coord_max(int l) const { return z_max_[l]; }
  int extent(int l) const { return z_max_[l] - z_min_[l] + 1; }

  long index_of(const std::vector<int>& z) const;
  std::vector<int> coords_of(long idx) const;
  Vec point(long idx) const;
  Vec point(const std::vector<int>& z) const;
  bool in_range(const std::vector<int>& z) const;

  // Nearest lattice coordinate to a continuous point (clamped to range).
  std::vector<int> nearest(const Vec& x) const;

  // Integer coordinates of lattice points whose value lies in [lo, hi]
  // (closed; boundary inclusion with a small tie tolerance). Returns false
  // if the range is empty on some axis.
  bool coord_range(const Vec& lo, const Vec& hi, std::vector<int>& z_lo,
                   std::vector<int>& z_hi) const;

 private:
  int n_;
  Vec eta_;
  Vec spacing_;
  std::vector<int> z_min_, z_max_;
  std::vector<long> stride_;
  long size_;
};

// Subset of lattice points as a dense membership mask.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(long lattice_size) : mask_(lattice_size, 0) {}

  bool contains(long idx) const { return mask_[idx] != 0; }
  void insert(long idx) {
    if (!mask_[idx]) {
      mask_[idx] = 1;
      ++count_;
    }
  }
  void erase(long idx) {
    if (mask_[idx]) {
      mask_[idx] = 0;
      --count_;
    }
  }
  long count() const { return count_; }
  long universe_size() const { return static_cast<long>(mask_.size()); }
  bool empty() const { return count_ == 0; }

  bool operator==(const IndexSet& o) const { return mask_ == o.mask_; }
  bool subset_of(const IndexSet& o) const;
  std::vector<long> indices() const;

 private:
  std::vector<uint8_t> mask_;
  long count_ = 0;
};

// Integer offsets o with sum_l (o_l s_l)^2 / lambda_{i,l} <= radius^2 in the
// kernel-metric sense: the discrete ball of d_i with radius gamma_i. Includes
// the zero offset.
std::vector<std::vector<int>> metric_ball_offsets(const Lattice& lat, const MetricContext& ctx,
                                                  double gamma, int i);

// Discrete interior: intersection over metrics i of
// { p in set : every lattice neighbor within gamma_i of p is in set }.
// Neighbors falling outside the represented domain count as absent.
IndexSet int_shrink(const Lattice& lat, const MetricContext& ctx, const IndexSet& set,
                    const Vec& radii);

// Discrete dilation: union over metrics i of the gamma_i-balls around set.
// Sets *overflow when some grown point falls outside the represented domain.
IndexSet out_grow(const Lattice& lat, const MetricContext& ctx, const IndexSet& set,
                  const Vec& radii, bool* overflow = nullptr);

// Serialize a discrete set as sorted lines of integer coordinate tuples.
std::string set_to_text(const Lattice& lat, const IndexSet& set);
IndexSet set_from_text(const Lattice& lat, const std::string& text);

}  // namespace etmpc
