#pragma once

#include <cmath>
#include <vector>

#include "geofuse/linalg.hpp"
#include "geofuse/metrics.hpp"

namespace geofuse {

struct RidgeResult {
  std::vector<double> weights;
  double test_r2 = 0.0;
};

/// Closed-form ridge regression: solves (Xt X + lambda I) w = Xt y by
/// Cholesky and scores the held-out split with r_squared. No intercept; the
/// caller centers or augments features as needed.
inline RidgeResult ridge_probe(const Mat& train_x, const std::vector<double>& train_y,
                               const Mat& test_x, const std::vector<double>& test_y,
                               double lambda) {
  if (!(lambda > 0.0)) throw parameter_error("ridge_probe: lambda must be > 0");
  size_t n = train_x.rows, d = train_x.cols;
  if (d < 1) throw parameter_error("ridge_probe: need at least one feature");
  if (train_y.size() != n) throw shape_error("ridge_probe: train_y length != train rows");
  if (test_x.cols != d) throw shape_error("ridge_probe: test feature count differs");
  if (test_y.size() != test_x.rows) throw shape_error("ridge_probe: test_y length != test rows");
  for (double v : train_x.a)
    if (!std::isfinite(v)) throw data_error("ridge_probe: non-finite training feature");
  for (double v : train_y)
    if (!std::isfinite(v)) throw data_error("ridge_probe: non-finite training target");

  Mat gram(d, d);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (size_t r = 0; r < n; ++r) s += train_x(r, i) * train_x(r, j);
      gram(i, j) = s;
      gram(j, i) = s;
    }
  for (size_t i = 0; i < d; ++i) gram(i, i) += lambda;

  std::vector<double> xty(d, 0.0);
  for (size_t r = 0; r < n; ++r)
    for (size_t j = 0; j < d; ++j) xty[j] += train_x(r, j) * train_y[r];

  RidgeResult res;
  res.weights = cholesky_solve(gram, xty);

  std::vector<double> pred(test_x.rows, 0.0);
  for (size_t r = 0; r < test_x.rows; ++r) {
    double s = 0.0;
    for (size_t j = 0; j < d; ++j) s += test_x(r, j) * res.weights[j];
    pred[r] = s;
  }
  res.test_r2 = r_squared(pred, test_y);
  return res;
}

}  // namespace geofuse
