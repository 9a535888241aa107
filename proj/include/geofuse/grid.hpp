#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "geofuse/errors.hpp"
#include "geofuse/geotransform.hpp"

namespace geofuse {

enum class GridKind { continuous, categorical };

/// Single-channel raster: the universal currency of the pipeline.
/// data is row-major, row 0 is the top (northernmost) row.
struct Grid {
  int width = 0;
  int height = 0;
  GeoTransform transform;
  std::vector<double> data;
  std::optional<double> nodata;
  GridKind kind = GridKind::continuous;

  Grid() = default;
  Grid(int w, int h, GridKind k = GridKind::continuous, double fill = 0.0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill), kind(k) {
    if (w <= 0 || h <= 0) throw parameter_error("grid dimensions must be positive");
  }

  size_t size() const { return data.size(); }

  double& at(int col, int row) { return data[static_cast<size_t>(row) * width + col]; }
  double at(int col, int row) const { return data[static_cast<size_t>(row) * width + col]; }

  bool in_bounds(int col, int row) const {
    return col >= 0 && col < width && row >= 0 && row < height;
  }

  bool is_nodata(double v) const {
    return nodata.has_value() && (v == *nodata || (std::isnan(v) && std::isnan(*nodata)));
  }

  bool same_geometry(const Grid& other) const {
    return width == other.width && height == other.height && transform == other.transform;
  }

  /// Checks the per-kind value contract. Categorical grids hold non-negative
  /// integers (or nodata); continuous grids hold finite values (or nodata).
  void validate(const std::string& name = "grid") const {
    if (width <= 0 || height <= 0)
      throw shape_error(name + ": dimensions must be positive");
    if (data.size() != static_cast<size_t>(width) * height)
      throw shape_error(name + ": data length " + std::to_string(data.size()) +
                        " != width*height " + std::to_string(static_cast<size_t>(width) * height));
    transform.require_valid();
    for (size_t i = 0; i < data.size(); ++i) {
      double v = data[i];
      if (is_nodata(v)) continue;
      if (kind == GridKind::categorical) {
        if (!(v >= 0.0) || v != std::floor(v))
          throw data_error(name + ": categorical value " + std::to_string(v) +
                           " at index " + std::to_string(i) + " is not a non-negative integer");
      } else if (!std::isfinite(v)) {
        throw data_error(name + ": non-finite value at index " + std::to_string(i));
      }
    }
  }
};

inline void require_aligned(const Grid& a, const Grid& b,
                            const std::string& name_a, const std::string& name_b) {
  if (!a.same_geometry(b))
    throw alignment_error("grids '" + name_a + "' and '" + name_b +
                          "' do not share shape and transform");
}

}  // namespace geofuse
