#pragma once

#include <cmath>
#include <optional>

#include "geofuse/grid.hpp"
#include "geofuse/parallel.hpp"

namespace geofuse {

enum class ResampleMethod { nearest, bilinear };

namespace detail {

// Nearest source index along one axis for a center-unit coordinate u (pixel i
// has its center at u = i). Ties break toward the smaller index.
inline int nearest_index(double u) {
  return static_cast<int>(std::ceil(u - 0.5));
}

inline double sample_nearest(const Grid& src, double col_f, double row_f, double fill) {
  // Accept anything inside the raster's outer extent.
  if (col_f < 0.0 || col_f > src.width || row_f < 0.0 || row_f > src.height) return fill;
  int c = std::clamp(nearest_index(col_f - 0.5), 0, src.width - 1);
  int r = std::clamp(nearest_index(row_f - 0.5), 0, src.height - 1);
  return src.at(c, r);
}

inline double sample_bilinear(const Grid& src, double col_f, double row_f, double fill) {
  double u = col_f - 0.5;  // center units
  double v = row_f - 0.5;
  int c0 = static_cast<int>(std::floor(u));
  int r0 = static_cast<int>(std::floor(v));
  if (c0 < 0 || c0 + 1 >= src.width || r0 < 0 || r0 + 1 >= src.height) {
    // Outside the hull spanned by pixel centers: fall back to nearest valid.
    double nv = sample_nearest(src, col_f, row_f, fill);
    return src.is_nodata(nv) ? fill : nv;
  }
  double fu = u - c0;
  double fv = v - r0;
  double w[4] = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
  double val[4] = {src.at(c0, r0), src.at(c0 + 1, r0), src.at(c0, r0 + 1), src.at(c0 + 1, r0 + 1)};
  double acc = 0.0, wsum = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (src.is_nodata(val[i])) continue;
    acc += w[i] * val[i];
    wsum += w[i];
  }
  if (wsum == 0.0) return fill;
  return acc / wsum;
}

}  // namespace detail

/// Resamples a grid onto a new geotransform/shape. Each target pixel samples
/// the source at the target pixel-center world coordinate. Categorical grids
/// only permit nearest; target pixels falling outside the source extent get
/// nodata (or 0 when the source declares none).
inline Grid resample(const Grid& src, const GeoTransform& target,
                     int target_w, int target_h, ResampleMethod method) {
  if (target_w <= 0 || target_h <= 0)
    throw parameter_error("resample: target dimensions must be positive");
  target.require_valid();
  src.transform.require_valid();
  if (method == ResampleMethod::bilinear && src.kind == GridKind::categorical)
    throw kind_error("resample: bilinear interpolation of categorical class ids is meaningless");

  Grid out(target_w, target_h, src.kind);
  out.transform = target;
  out.nodata = src.nodata;
  double fill = src.nodata.value_or(0.0);

  parallel_rows(target_h, [&](int r) {
    for (int c = 0; c < target_w; ++c) {
      auto [wx, wy] = target.pixel_center(c, r);
      auto [col_f, row_f] = src.transform.world_to_pixel(wx, wy);
      double v = (method == ResampleMethod::nearest)
                     ? detail::sample_nearest(src, col_f, row_f, fill)
                     : detail::sample_bilinear(src, col_f, row_f, fill);
      out.at(c, r) = v;
    }
  });
  return out;
}

}  // namespace geofuse
