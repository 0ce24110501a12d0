#pragma once

#include <string>

#include "etmpc/types.hpp"

namespace etmpc {

// Training data for the multi-output GP: rows of Z are z_t = [x_t; u_t],
// column i of Y is the target vector for output dimension i (the observed
// next-state component). Append-only during an execution phase.
class Dataset {
 public:
  Dataset(int n_x, int n_u) : n_x_(n_x), n_u_(n_u), Z_(0, n_x + n_u), Y_(0, n_x) {}

  int size() const { return static_cast<int>(Z_.rows()); }
  int n_x() const { return n_x_; }
  int n_u() const { return n_u_; }

  const Mat& inputs() const { return Z_; }
  const Mat& targets() const { return Y_; }
  Vec target_column(int i) const { return Y_.col(i); }

  void append(const Vec& x, const Vec& u, const Vec& x_next);
  void append_all(const Dataset& other);

  void save_csv(const std::string& path) const;
  static Dataset load_csv(const std::string& path, int n_x, int n_u);

 private:
  int n_x_;
  int n_u_;
  Mat Z_;  // N x (n_x+n_u)
  Mat Y_;  // N x n_x
};

}  // namespace etmpc
