#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "geofuse/errors.hpp"

namespace geofuse {

/// Small dense row-major matrix. Everything in this project is desk scale, so
/// plain loops with a fixed summation order keep results deterministic.
struct Mat {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(size_t i, size_t j) { return a[i * cols + j]; }
  double operator()(size_t i, size_t j) const { return a[i * cols + j]; }

  static Mat identity(size_t n) {
    Mat m(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Mat matmul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw shape_error("matmul: inner dimensions disagree");
  Mat out(x.rows, y.cols);
  for (size_t i = 0; i < x.rows; ++i)
    for (size_t k = 0; k < x.cols; ++k) {
      double v = x(i, k);
      if (v == 0.0) continue;
      for (size_t j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
    }
  return out;
}

inline Mat transpose(const Mat& x) {
  Mat out(x.cols, x.rows);
  for (size_t i = 0; i < x.rows; ++i)
    for (size_t j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
  return out;
}

/// Solves A x = b for symmetric positive definite A by Cholesky decomposition.
inline std::vector<double> cholesky_solve(const Mat& A, const std::vector<double>& b) {
  size_t n = A.rows;
  if (A.cols != n || b.size() != n) throw shape_error("cholesky_solve: dimensions disagree");
  Mat L(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      double s = A(i, j);
      for (size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (!(s > 0.0)) throw data_error("cholesky_solve: matrix is not positive definite");
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  std::vector<double> y(n), x(n);
  for (size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (size_t k = 0; k < i; ++k) s -= L(i, k) * y[k];
    y[i] = s / L(i, i);
  }
  for (size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (size_t k = ii + 1; k < n; ++k) s -= L(k, ii) * x[k];
    x[ii] = s / L(ii, ii);
  }
  return x;
}

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Mat vectors;                 // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Deterministic:
/// fixed sweep order, fixed iteration cap. Adequate for the <= 768x768
/// matrices produced by embedding analytics.
inline EigenDecomposition jacobi_eigen_symmetric(Mat A) {
  size_t n = A.rows;
  if (A.cols != n) throw shape_error("jacobi_eigen_symmetric: matrix must be square");
  Mat V = Mat::identity(n);
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off <= 1e-30) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double apq = A(p, q);
        if (apq == 0.0) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  // Sort eigenpairs by descending eigenvalue (stable in index order).
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  for (size_t i = 0; i < n; ++i) {
    size_t best = i;
    for (size_t j = i + 1; j < n; ++j)
      if (A(order[j], order[j]) > A(order[best], order[best])) best = j;
    std::swap(order[i], order[best]);
  }
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (size_t j = 0; j < n; ++j) {
    out.values[j] = A(order[j], order[j]);
    for (size_t i = 0; i < n; ++i) out.vectors(i, j) = V(i, order[j]);
  }
  return out;
}

}  // namespace geofuse
