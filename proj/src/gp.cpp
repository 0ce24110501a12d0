#include "etmpc/gp.hpp"

#include <cmath>
#include <stdexcept>

namespace etmpc {

namespace {

// Squared weighted distance ||z1-z2||^2_{Lambda_i^{-1}}.
double sqdist(const Hyperparams& hp, const Vec& z1, const Vec& z2, int i) {
  double s = 0.0;
  for (int l = 0; l < hp.input_dim(); ++l) {
    const double d = (z1(l) - z2(l)) / hp.length_scales(i, l);
    s += d * d;
  }
  return s;
}

}  // namespace

double se_kernel(const Hyperparams& hp, const Vec& z1, const Vec& z2, int i) {
  if (z1.size() != hp.input_dim() || z2.size() != hp.input_dim())
    throw std::invalid_argument("se_kernel: input dimension mismatch");
  const double a2 = hp.alpha(i) * hp.alpha(i);
  return a2 * std::exp(-0.5 * sqdist(hp, z1, z2, i));
}

GpModel GpModel::fit(const Dataset& data, const Hyperparams& hp) {
  hp.validate();
  if (data.size() < 1) throw std::invalid_argument("GpModel::fit: empty dataset");
  if (data.n_x() != hp.n_x || data.n_u() != hp.n_u)
    throw std::invalid_argument("GpModel::fit: dataset/hyperparam dimension mismatch");

  GpModel m;
  m.hp_ = hp;
  m.Z_ = data.inputs();
  const int N = data.size();
  m.beta_ = Vec::Zero(hp.n_x);
  m.beta_fallback_ = Vec::Zero(hp.n_x);
  m.jitter_ = Vec::Zero(hp.n_x);
  m.chol_.resize(hp.n_x);
  m.weights_.resize(hp.n_x);

  for (int i = 0; i < hp.n_x; ++i) {
    Mat K(N, N);
    for (int t = 0; t < N; ++t) {
      K(t, t) = hp.alpha(i) * hp.alpha(i);
      for (int s = t + 1; s < N; ++s) {
        const double v =
            hp.alpha(i) * hp.alpha(i) *
            std::exp(-0.5 * sqdist(hp, m.Z_.row(t).transpose(), m.Z_.row(s).transpose(), i));
        K(t, s) = v;
        K(s, t) = v;
      }
    }
    const double sw2 = hp.sigma_w(i) * hp.sigma_w(i);
    const double a2 = hp.alpha(i) * hp.alpha(i);

    // Jitter escalation: 1e-12*alpha^2 up to 1e-6*alpha^2.
    double jitter = 0.0;
    Eigen::LLT<Mat> llt(K + sw2 * Mat::Identity(N, N));
    for (double j = 1e-12 * a2; llt.info() != Eigen::Success && j <= 1e-6 * a2; j *= 10.0) {
      jitter = j;
      llt.compute(K + (sw2 + jitter) * Mat::Identity(N, N));
    }
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("GpModel::fit: kernel matrix not positive definite for dimension " +
                               std::to_string(i) + " (duplicate inputs with sigma_w = 0?)");
    m.chol_[i] = llt;
    m.jitter_(i) = jitter;

    const Vec y = data.target_column(i);
    m.weights_[i] = llt.solve(y);

    // A negative radicand means the data itself is inconsistent with the
    // RKHS-ball and noise assumptions (they guarantee nonnegativity). The
    // formula then carries no guarantee at any value; fall back to its
    // conservative extreme sqrt(b^2 + N) and flag the dimension.
    const double radicand = hp.b(i) * hp.b(i) - y.dot(m.weights_[i]) + N;
    if (radicand >= 0.0) {
      m.beta_(i) = std::sqrt(radicand);
    } else {
      m.beta_(i) = std::sqrt(hp.b(i) * hp.b(i) + N);
      m.beta_fallback_(i) = 1.0;
    }
  }
  return m;
}

Mat GpModel::exp_factors(const Mat& queries, int col0, int i) const {
  const long S = queries.rows();
  const int N = data_size();
  const int dims = static_cast<int>(queries.cols());
  Mat out(S, N);
  for (int n = 0; n < N; ++n) {
    Vec acc = Vec::Zero(S);
    for (int l = 0; l < dims; ++l) {
      const double inv = 1.0 / hp_.length_scales(i, col0 + l);
      acc += ((queries.col(l).array() - Z_(n, col0 + l)) * inv).square().matrix();
    }
    out.col(n) = (-0.5 * acc.array()).exp();
  }
  return out;
}

Mat GpModel::mean_grid(const Mat& states, const Mat& inputs, int i) const {
  if (states.cols() != hp_.n_x || inputs.cols() != hp_.n_u)
    throw std::invalid_argument("GpModel::mean_grid: dimension mismatch");
  const double a2 = hp_.alpha(i) * hp_.alpha(i);
  const Mat ex = exp_factors(states, 0, i);
  Mat eu = exp_factors(inputs, hp_.n_x, i);
  eu.array().rowwise() *= weights_[i].transpose().array();
  return a2 * ex * eu.transpose();
}

Vec GpModel::sigma_states(const Mat& states, const Vec& u, int i) const {
  if (states.cols() != hp_.n_x || u.size() != hp_.n_u)
    throw std::invalid_argument("GpModel::sigma_states: dimension mismatch");
  const long S = states.rows();
  const int N = data_size();
  const double a2 = hp_.alpha(i) * hp_.alpha(i);
  Vec eu(N);
  for (int n = 0; n < N; ++n) {
    double s = 0.0;
    for (int l = 0; l < hp_.n_u; ++l) {
      const double d = (u(l) - Z_(n, hp_.n_x + l)) / hp_.length_scales(i, hp_.n_x + l);
      s += d * d;
    }
    eu(n) = std::exp(-0.5 * s);
  }
  Vec out(S);
  const long chunk = 4096;
  for (long r0 = 0; r0 < S; r0 += chunk) {
    const long rows = std::min(chunk, S - r0);
    Mat k = a2 * exp_factors(states.middleRows(r0, rows), 0, i);
    k.array().rowwise() *= eu.transpose().array();
    const Mat v = chol_[i].solve(k.transpose());
    for (long r = 0; r < rows; ++r) {
      const double var = a2 - k.row(r).dot(v.col(r));
      out(r0 + r) = std::sqrt(std::clamp(var, 0.0, a2));
    }
  }
  return out;
}

Vec GpModel::assemble_query(const Vec& x, const Vec& u) const {
  if (x.size() != hp_.n_x || u.size() != hp_.n_u)
    throw std::invalid_argument("GpModel: query dimension mismatch");
  Vec z(hp_.input_dim());
  z.head(hp_.n_x) = x;
  z.tail(hp_.n_u) = u;
  return z;
}

Vec GpModel::kernel_vector(const Vec& z, int i) const {
  const int N = data_size();
  Vec k(N);
  const double a2 = hp_.alpha(i) * hp_.alpha(i);
  for (int t = 0; t < N; ++t) {
    double s = 0.0;
    for (int l = 0; l < hp_.input_dim(); ++l) {
      const double d = (z(l) - Z_(t, l)) / hp_.length_scales(i, l);
      s += d * d;
    }
    k(t) = a2 * std::exp(-0.5 * s);
  }
  return k;
}

Vec GpModel::predict_mean(const Vec& x, const Vec& u) const {
  const Vec z = assemble_query(x, u);
  Vec mu(hp_.n_x);
  for (int i = 0; i < hp_.n_x; ++i) mu(i) = kernel_vector(z, i).dot(weights_[i]);
  return mu;
}

double GpModel::predict_variance(const Vec& x, const Vec& u, int i) const {
  const Vec z = assemble_query(x, u);
  const Vec k = kernel_vector(z, i);
  const double a2 = hp_.alpha(i) * hp_.alpha(i);
  const double var = a2 - k.dot(chol_[i].solve(k));
  if (var < -1e-6 * a2)
    throw std::runtime_error("GpModel::predict_variance: negative variance (factorization defect)");
  return std::clamp(var, 0.0, a2);
}

Vec GpModel::predict_sigma(const Vec& x, const Vec& u) const {
  Vec s(hp_.n_x);
  for (int i = 0; i < hp_.n_x; ++i) s(i) = std::sqrt(predict_variance(x, u, i));
  return s;
}

}  // namespace etmpc
