#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "aes/matrix.hpp"

namespace aes::test {

/// Seeded generator for property suites; every suite owns one.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::uint64_t bits() { return rng_(); }

  Matrix matrix(std::size_t n, double lo, double hi) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  /// Entries in [lo, hi] with the off-diagonal folded to its absolute value.
  Matrix metzler(std::size_t n, double lo, double hi) {
    Matrix m = matrix(n, lo, hi);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) m(i, j) = std::abs(m(i, j));
    return m;
  }

  Matrix nonnegative(std::size_t n, double hi) { return matrix(n, 0.0, hi); }

  /// Zeroes each off-diagonal entry with probability p (reducible patterns).
  Matrix sparsify(Matrix m, double p) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (i != j && uniform(0.0, 1.0) < p) m(i, j) = 0.0;
    return m;
  }

  Vector positive(std::size_t n, double lo = 0.1, double hi = 1.0) {
    Vector v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

/// Independent oracle: full nonsymmetric eigensolve.
inline double eigen_abscissa(const Matrix& m) {
  const auto ev = Eigen::EigenSolver<Eigen::MatrixXd>(to_eigen(m), false).eigenvalues();
  double best = -INFINITY;
  for (Eigen::Index k = 0; k < ev.size(); ++k) best = std::max(best, ev[k].real());
  return best;
}

inline double eigen_radius(const Matrix& m) {
  const auto ev = Eigen::EigenSolver<Eigen::MatrixXd>(to_eigen(m), false).eigenvalues();
  double best = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) best = std::max(best, std::abs(ev[k]));
  return best;
}

/// Naive product, written independently of the library operators.
inline Vector multiply(const Matrix& m, const Vector& x) {
  Vector y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) y[i] += m(i, j) * x[j];
  return y;
}

}  // namespace aes::test
