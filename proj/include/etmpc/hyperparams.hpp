#pragma once

#include <stdexcept>
#include <vector>

#include "etmpc/types.hpp"

namespace etmpc {

// Per-output-dimension SE-kernel hyperparameters together with the RKHS
// norm bound and the additive-noise bound. One GP per state dimension,
// zero cross-covariance between outputs.
struct Hyperparams {
  int n_x = 0;
  int n_u = 0;
  Vec alpha;            // signal std-dev per output dimension (n_x)
  Mat length_scales;    // row i: length-scale vector of GP i, size n_x+n_u
  Vec b;                // RKHS norm bound per output dimension
  Vec sigma_w;          // additive-noise bound per output dimension

  int input_dim() const { return n_x + n_u; }

  // lambda_{i,l} = length_scales(i,l)^2, the diagonal of Lambda_i.
  double lambda(int i, int l) const {
    const double s = length_scales(i, l);
    return s * s;
  }

  void validate() const;

  // b_i <= min_l sqrt(lambda_{l,i}) / alpha_l over the state axes,
  // where lambda_{l,i} is GP l's squared length-scale for state axis i.
  bool assumption3_holds() const;
  double assumption3_bound(int i) const;
};

inline void Hyperparams::validate() const {
  if (n_x < 1 || n_u < 0) throw std::invalid_argument("Hyperparams: bad dimensions");
  if (alpha.size() != n_x || b.size() != n_x || sigma_w.size() != n_x)
    throw std::invalid_argument("Hyperparams: per-dimension vectors must have n_x entries");
  if (length_scales.rows() != n_x || length_scales.cols() != n_x + n_u)
    throw std::invalid_argument("Hyperparams: length_scales must be n_x x (n_x+n_u)");
  if ((alpha.array() <= 0.0).any()) throw std::invalid_argument("Hyperparams: alpha_i must be positive");
  if ((length_scales.array() <= 0.0).any())
    throw std::invalid_argument("Hyperparams: length-scales must be positive");
  if ((b.array() <= 0.0).any()) throw std::invalid_argument("Hyperparams: b_i must be positive");
  if ((sigma_w.array() < 0.0).any()) throw std::invalid_argument("Hyperparams: sigma_w_i must be nonnegative");
}

inline double Hyperparams::assumption3_bound(int i) const {
  double m = std::numeric_limits<double>::infinity();
  for (int l = 0; l < n_x; ++l) m = std::min(m, length_scales(l, i) / alpha(l));
  return m;
}

inline bool Hyperparams::assumption3_holds() const {
  for (int i = 0; i < n_x; ++i)
    if (b(i) > assumption3_bound(i)) return false;
  return true;
}

}  // namespace etmpc
