#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "eqbandit/errors.hpp"

namespace eqbandit {

/// Dense row-major square matrix.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size, double fill = 0.0) : n(size), data(size * size, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += (*this)(i, j);
    return s;
  }

  bool is_symmetric(double tol = 0.0) const {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

  /// y = A x
  void multiply(const double* x, double* y) const {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const double* row = &data[i * n];
      for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }
};

/// Largest eigenvalue of a symmetric nonnegative matrix by power iteration on
/// A + I (the shift keeps bipartite graphs from oscillating).
inline double perron_root(const SquareMatrix& a, int max_iters = 10000, double tol = 1e-13) {
  if (a.n == 0) return 0.0;
  std::vector<double> v(a.n, 1.0 / std::sqrt(static_cast<double>(a.n))), w(a.n);
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    a.multiply(v.data(), w.data());
    double norm = 0.0;
    for (std::size_t i = 0; i < a.n; ++i) {
      w[i] += v[i];
      norm += w[i] * w[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return -1.0;
    for (auto& x : w) x /= norm;
    const double next = norm - 1.0;
    v.swap(w);
    if (std::abs(next - lambda) < tol * std::max(1.0, std::abs(next))) return next;
    lambda = next;
  }
  return lambda;
}

/// Row-major, space-separated, one row per line, full round-trip precision.
inline void write_matrix(const std::string& path, const SquareMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

inline SquareMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (!ls.eof()) throw Error("'" + path + "': non-numeric entry");
    rows.push_back(std::move(row));
  }
  SquareMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw Error("'" + path + "': matrix is not square");
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace eqbandit
