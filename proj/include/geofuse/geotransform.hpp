#pragma once

#include <cmath>
#include <utility>

#include "geofuse/errors.hpp"

namespace geofuse {

/// Affine pixel->world mapping, GDAL coefficient order.
///   x = origin_x + col * pixel_w + row * shear_x
///   y = origin_y + col * shear_y + row * pixel_h
/// (origin_x, origin_y) is the outer corner of pixel (0,0); pixel_h is
/// negative for north-up rasters. World coordinates of a pixel are taken at
/// its center, i.e. at (col + 0.5, row + 0.5).
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_w = 1.0;
  double pixel_h = -1.0;
  double shear_x = 0.0;
  double shear_y = 0.0;

  double det() const { return pixel_w * pixel_h - shear_x * shear_y; }

  bool valid() const {
    return pixel_w != 0.0 && pixel_h != 0.0 && det() != 0.0 &&
           std::isfinite(origin_x) && std::isfinite(origin_y) &&
           std::isfinite(pixel_w) && std::isfinite(pixel_h) &&
           std::isfinite(shear_x) && std::isfinite(shear_y);
  }

  void require_valid() const {
    if (!valid()) throw parameter_error("geotransform is degenerate (zero pixel size or singular linear part)");
  }

  /// World coordinate of fractional pixel position (col, row) in corner units.
  std::pair<double, double> apply(double col, double row) const {
    return {origin_x + col * pixel_w + row * shear_x,
            origin_y + col * shear_y + row * pixel_h};
  }

  std::pair<double, double> pixel_center(int col, int row) const {
    return apply(col + 0.5, row + 0.5);
  }

  /// Inverse map: world (x, y) -> fractional (col, row) in corner units.
  std::pair<double, double> world_to_pixel(double x, double y) const {
    double d = det();
    double dx = x - origin_x;
    double dy = y - origin_y;
    double col = (dx * pixel_h - dy * shear_x) / d;
    double row = (dy * pixel_w - dx * shear_y) / d;
    return {col, row};
  }

  bool operator==(const GeoTransform&) const = default;
};

}  // namespace geofuse
