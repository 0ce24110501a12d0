#include "etmpc/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace etmpc {

void Dataset::append(const Vec& x, const Vec& u, const Vec& x_next) {
  if (x.size() != n_x_ || u.size() != n_u_ || x_next.size() != n_x_)
    throw std::invalid_argument("Dataset::append: dimension mismatch");
  const int n = size();
  Z_.conservativeResize(n + 1, Eigen::NoChange);
  Y_.conservativeResize(n + 1, Eigen::NoChange);
  Z_.row(n).head(n_x_) = x.transpose();
  Z_.row(n).tail(n_u_) = u.transpose();
  Y_.row(n) = x_next.transpose();
}

void Dataset::append_all(const Dataset& other) {
  if (other.n_x_ != n_x_ || other.n_u_ != n_u_)
    throw std::invalid_argument("Dataset::append_all: dimension mismatch");
  const int n = size();
  const int m = other.size();
  if (m == 0) return;
  Z_.conservativeResize(n + m, Eigen::NoChange);
  Y_.conservativeResize(n + m, Eigen::NoChange);
  Z_.middleRows(n, m) = other.Z_;
  Y_.middleRows(n, m) = other.Y_;
}

void Dataset::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Dataset::save_csv: cannot open " + path);
  for (int i = 0; i < n_x_; ++i) out << "x" << i + 1 << ",";
  for (int i = 0; i < n_u_; ++i) out << "u" << i + 1 << ",";
  for (int i = 0; i < n_x_; ++i) out << "y" << i + 1 << (i + 1 < n_x_ ? "," : "");
  out << "\n";
  out.precision(17);
  for (int t = 0; t < size(); ++t) {
    for (int c = 0; c < Z_.cols(); ++c) out << Z_(t, c) << ",";
    for (int c = 0; c < Y_.cols(); ++c) out << Y_(t, c) << (c + 1 < Y_.cols() ? "," : "");
    out << "\n";
  }
}

Dataset Dataset::load_csv(const std::string& path, int n_x, int n_u) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Dataset::load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("Dataset::load_csv: empty file");
  Dataset d(n_x, n_u);
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    row.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != 2 * n_x + n_u)
      throw std::runtime_error("Dataset::load_csv: bad column count");
    Vec x(n_x), u(n_u), y(n_x);
    for (int i = 0; i < n_x; ++i) x(i) = row[i];
    for (int i = 0; i < n_u; ++i) u(i) = row[n_x + i];
    for (int i = 0; i < n_x; ++i) y(i) = row[n_x + n_u + i];
    d.append(x, u, y);
  }
  return d;
}

}  // namespace etmpc
