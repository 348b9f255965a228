#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "glrsens/errors.hpp"

namespace glrsens {

using Vec = std::vector<double>;

// Small dense row-major matrix. Problem dimensions here are tiny (n <= 3 for
// the built-in problems), so everything below is plain O(n^3) with no blocking.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

inline Vec matvec(const Matrix& m, const Vec& v) {
  if (m.cols() != static_cast<int>(v.size())) throw DimensionMismatch("matvec: size mismatch");
  Vec out(static_cast<std::size_t>(m.rows()), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

struct LinearSolve {
  Vec x;
  // Reciprocal condition estimate from the pivot magnitudes: min|u_ii|/max|u_ii|.
  // Zero when a pivot vanished exactly.
  double rcond = 0.0;
};

// LU with partial pivoting; solves a*x = b without forming a^-1.
inline LinearSolve solve_partial_pivot(Matrix a, Vec b) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n) {
    throw DimensionMismatch("solve_partial_pivot: need square system");
  }
  double min_piv = std::numeric_limits<double>::infinity();
  double max_piv = 0.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::fabs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double cand = std::fabs(a(i, k));
      if (cand > best) {
        best = cand;
        piv = i;
      }
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(piv)]);
    }
    const double pivot = a(k, k);
    if (!std::isfinite(pivot)) throw NonFiniteValue("solve_partial_pivot: non-finite pivot");
    min_piv = std::min(min_piv, std::fabs(pivot));
    max_piv = std::max(max_piv, std::fabs(pivot));
    if (pivot == 0.0) return {Vec(static_cast<std::size_t>(n), 0.0), 0.0};
    for (int i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / pivot;
      a(i, k) = 0.0;
      for (int j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
      b[static_cast<std::size_t>(i)] -= factor * b[static_cast<std::size_t>(k)];
    }
  }
  Vec x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) acc -= a(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = acc / a(i, i);
  }
  return {std::move(x), max_piv > 0.0 ? min_piv / max_piv : 0.0};
}

// Determinant via the same factorization (sign tracked through row swaps).
inline double determinant(Matrix a) {
  const int n = a.rows();
  if (a.cols() != n) throw DimensionMismatch("determinant: need square matrix");
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::fabs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::fabs(a(i, k)) > best) {
        best = std::fabs(a(i, k));
        piv = i;
      }
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      det = -det;
    }
    const double pivot = a(k, k);
    if (pivot == 0.0) return 0.0;
    det *= pivot;
    for (int i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / pivot;
      for (int j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
    }
  }
  return det;
}

}  // namespace glrsens
