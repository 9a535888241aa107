#pragma once

#include <cmath>
#include <vector>

#include "geofuse/grid.hpp"
#include "geofuse/parallel.hpp"

namespace geofuse {

/// Square convolution kernel with (2*radius+1)^2 non-negative weights that
/// sum to 1. Sampled Gaussians are symmetric under 90-degree rotation and
/// reflection by construction.
struct Kernel {
  int radius = 0;
  std::vector<double> weights;  // (2r+1)x(2r+1), row-major

  int side() const { return 2 * radius + 1; }
  double w(int dx, int dy) const {
    return weights[static_cast<size_t>(dy + radius) * side() + (dx + radius)];
  }
};

/// Sampled 2-D Gaussian truncated at radius ceil(3*sigma), renormalized to
/// sum exactly 1.
inline Kernel make_gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw parameter_error("gaussian kernel: sigma must be > 0");
  Kernel k;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  int side = k.side();
  k.weights.resize(static_cast<size_t>(side) * side);
  double sum = 0.0;
  for (int dy = -k.radius; dy <= k.radius; ++dy) {
    for (int dx = -k.radius; dx <= k.radius; ++dx) {
      double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k.weights[static_cast<size_t>(dy + k.radius) * side + (dx + k.radius)] = v;
      sum += v;
    }
  }
  for (double& v : k.weights) v /= sum;
  return k;
}

/// Reflect index into [0, n): ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

/// Gaussian smoothing with reflect padding. Nodata neighbors are dropped from
/// the weighted sum and the remaining weights renormalized; nodata pixels
/// themselves stay nodata in the output. Output keeps shape and transform.
inline Grid gaussian_blur(const Grid& grid, double sigma) {
  if (!(sigma > 0.0)) throw parameter_error("gaussian_blur: sigma must be > 0");
  if (grid.kind != GridKind::continuous)
    throw kind_error("gaussian_blur: blur of categorical class ids is meaningless");

  Kernel k = make_gaussian_kernel(sigma);
  Grid out = grid;
  parallel_rows(grid.height, [&](int r) {
    for (int c = 0; c < grid.width; ++c) {
      double center = grid.at(c, r);
      if (grid.is_nodata(center)) {
        out.at(c, r) = center;
        continue;
      }
      double acc = 0.0;
      double wsum = 0.0;
      for (int dy = -k.radius; dy <= k.radius; ++dy) {
        int rr = reflect_index(r + dy, grid.height);
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
          int cc = reflect_index(c + dx, grid.width);
          double v = grid.at(cc, rr);
          if (grid.is_nodata(v)) continue;
          double w = k.w(dx, dy);
          acc += w * v;
          wsum += w;
        }
      }
      out.at(c, r) = acc / wsum;  // wsum > 0: the center pixel is valid
    }
  });
  return out;
}

}  // namespace geofuse
