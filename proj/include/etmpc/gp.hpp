#pragma once

#include <memory>
#include <string>

#include "etmpc/dataset.hpp"
#include "etmpc/hyperparams.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

// SE kernel k_i(z1, z2) = alpha_i^2 exp(-1/2 ||z1-z2||^2_{Lambda_i^{-1}}).
double se_kernel(const Hyperparams& hp, const Vec& z1, const Vec& z2, int i);

// Multi-output GP posterior: independent SE-kernel GPs per state dimension,
// each with a cached factorization of (K_i + sigma_{w,i}^2 I) and the
// deterministic error-bound scalar beta_{N,i}. Immutable after fit.
class GpModel {
 public:
  static GpModel fit(const Dataset& data, const Hyperparams& hp);

  const Hyperparams& hyperparams() const { return hp_; }
  int data_size() const { return static_cast<int>(Z_.rows()); }

  // Stacked posterior mean mu_f(x, u; D_N) over all output dimensions.
  Vec predict_mean(const Vec& x, const Vec& u) const;

  // Posterior variance sigma_{f_i}^2(x, u; D_{N,i}), clamped to [0, alpha_i^2].
  double predict_variance(const Vec& x, const Vec& u, int i) const;

  // Posterior std-dev per dimension, stacked.
  Vec predict_sigma(const Vec& x, const Vec& u) const;

  // Batched mean over the Cartesian product of state rows (S x n_x) and
  // input rows (U x n_u) for dimension i; the SE kernel factorizes over the
  // state and input blocks, so the whole grid is a single matrix product.
  // Returns an S x U matrix.
  Mat mean_grid(const Mat& states, const Mat& inputs, int i) const;

  // Batched posterior std-dev for many states against one input, dimension i.
  Vec sigma_states(const Mat& states, const Vec& u, int i) const;

  double beta(int i) const { return beta_(i); }
  const Vec& beta() const { return beta_; }

  // True when the beta radicand b_i^2 - Y^T (K + sigma_w^2 I)^{-1} Y + N came
  // out negative, i.e. the data falsified the RKHS-ball/noise assumptions for
  // dimension i and beta fell back to sqrt(b_i^2 + N).
  bool beta_fallback(int i) const { return beta_fallback_(i) != 0.0; }

  // Jitter added to the i-th kernel matrix before factorization succeeded
  // (zero when the plain matrix was already positive definite).
  double jitter_used(int i) const { return jitter_(i); }

 private:
  GpModel() = default;

  // Kernel vector k*_{N,i}(z) against all training inputs.
  Vec kernel_vector(const Vec& z, int i) const;

  // exp(-1/2 ||q - Z block||^2) factors for query rows against the training
  // columns starting at col0 (state block col0 = 0, input block col0 = n_x).
  Mat exp_factors(const Mat& queries, int col0, int i) const;
  Vec assemble_query(const Vec& x, const Vec& u) const;

  Hyperparams hp_;
  Mat Z_;                              // training inputs, N x (n_x+n_u)
  std::vector<Eigen::LLT<Mat>> chol_;  // per dimension, K_i + sigma^2 I (+ jitter)
  std::vector<Vec> weights_;           // (K_i + sigma^2 I)^{-1} Y_{N,i}
  Vec beta_;
  Vec beta_fallback_;
  Vec jitter_;
};

}  // namespace etmpc
