#pragma once

#include <array>
#include <functional>
#include <vector>

#include "geofuse/blur.hpp"
#include "geofuse/class_map.hpp"
#include "geofuse/geometry.hpp"
#include "geofuse/grid.hpp"
#include "geofuse/parallel.hpp"

namespace geofuse {

namespace detail {

/// Pixel-center coverage rule shared by all rasterizers: polygons cover by
/// even-odd containment, points and linestrings by buffer distance
/// (inclusive). A buffered polygon covers its interior plus the buffer belt.
inline bool covers(const Point& center, const Geometry& geom, double buffer_radius) {
  if (std::holds_alternative<Polygon>(geom)) {
    if (point_in_polygon(center, std::get<Polygon>(geom))) return true;
    return buffer_radius > 0.0 && within_radius(center, geom, buffer_radius);
  }
  return within_radius(center, geom, buffer_radius);
}

}  // namespace detail

/// Burns vector features into a categorical class grid. Polygons fill by
/// pixel-center containment (even-odd, holes respected); linestrings and
/// points burn where the pixel center lies within the entry's buffer radius.
/// Later ClassMap entries overwrite earlier ones; uncovered pixels get the
/// background class.
inline Grid rasterize_classes(const VectorLayer& layer, const ClassMap& class_map,
                              const GeoTransform& transform, int width, int height) {
  if (class_map.entries.empty()) throw parameter_error("rasterize_classes: class map is empty");
  if (width <= 0 || height <= 0) throw parameter_error("rasterize_classes: dimensions must be positive");
  transform.require_valid();

  // Feature indices per entry, with padded bounds for a cheap reject.
  struct Burn {
    const ClassMapEntry* entry;
    std::vector<std::pair<const Geometry*, Bounds>> geoms;
  };
  std::vector<Burn> burns;
  for (const auto& e : class_map.entries) {
    Burn b{&e, {}};
    for (const auto& f : layer.features)
      if (e.matches(f)) b.geoms.emplace_back(&f.geometry, geometry_bounds(f.geometry, e.buffer_radius));
    burns.push_back(std::move(b));
  }

  Grid out(width, height, GridKind::categorical, static_cast<double>(class_map.background_class_id));
  out.transform = transform;

  parallel_rows(height, [&](int r) {
    for (int c = 0; c < width; ++c) {
      auto [x, y] = transform.pixel_center(c, r);
      Point center{x, y};
      // Last entry in painter's order wins; scan back to front.
      for (size_t bi = burns.size(); bi-- > 0;) {
        const Burn& b = burns[bi];
        bool hit = false;
        for (const auto& [geom, bounds] : b.geoms) {
          if (!bounds.contains(center)) continue;
          if (detail::covers(center, *geom, b.entry->buffer_radius)) {
            hit = true;
            break;
          }
        }
        if (hit) {
          out.at(c, r) = static_cast<double>(b.entry->class_id);
          break;
        }
      }
    }
  });
  return out;
}

/// 0/1 grid marking pixels whose center lies within `radius` (inclusive) of
/// any selected feature. With radius 0 this reduces to pixel-center polygon
/// containment for polygon features.
struct BinaryMask {
  Grid grid;  // categorical, values in {0,1}, no nodata
};

inline BinaryMask binary_mask(const VectorLayer& layer,
                              const std::function<bool(const Feature&)>& selector,
                              double radius, const GeoTransform& transform,
                              int width, int height) {
  if (radius < 0.0) throw parameter_error("binary_mask: radius must be >= 0");
  if (width <= 0 || height <= 0) throw parameter_error("binary_mask: dimensions must be positive");
  transform.require_valid();

  std::vector<std::pair<const Geometry*, Bounds>> selected;
  for (const auto& f : layer.features)
    if (selector(f)) selected.emplace_back(&f.geometry, geometry_bounds(f.geometry, radius));

  BinaryMask mask;
  mask.grid = Grid(width, height, GridKind::categorical, 0.0);
  mask.grid.transform = transform;
  parallel_rows(height, [&](int r) {
    for (int c = 0; c < width; ++c) {
      auto [x, y] = transform.pixel_center(c, r);
      Point center{x, y};
      for (const auto& [geom, bounds] : selected) {
        if (!bounds.contains(center)) continue;
        if (within_radius(center, *geom, radius)) {
          mask.grid.at(c, r) = 1.0;
          break;
        }
      }
    }
  });
  return mask;
}

inline BinaryMask binary_mask(const VectorLayer& layer, const TagSelector& selector,
                              double radius, const GeoTransform& transform,
                              int width, int height) {
  return binary_mask(
      layer, [&selector](const Feature& f) { return selector.matches(f); }, radius,
      transform, width, height);
}

/// Maps a categorical class grid to r,g,b channels in [0,1] via the palette;
/// optionally smooths each channel independently afterwards (smoothing
/// happens in color space, not on class ids).
inline std::array<Grid, 3> to_rgb_raster(const Grid& class_grid, const ClassMap& class_map,
                                         std::optional<double> smooth_sigma = std::nullopt) {
  if (class_grid.kind != GridKind::categorical)
    throw kind_error("to_rgb_raster: input must be a categorical class grid");

  std::array<Grid, 3> channels;
  for (int ch = 0; ch < 3; ++ch) {
    channels[ch] = Grid(class_grid.width, class_grid.height, GridKind::continuous);
    channels[ch].transform = class_grid.transform;
  }

  for (int r = 0; r < class_grid.height; ++r) {
    for (int c = 0; c < class_grid.width; ++c) {
      double v = class_grid.at(c, r);
      if (class_grid.is_nodata(v)) {
        for (int ch = 0; ch < 3; ++ch) channels[ch].at(c, r) = 0.0;
        continue;
      }
      int id = static_cast<int>(v);
      Rgb color;
      if (const ClassMapEntry* e = class_map.find_class(id)) {
        color = e->color;
      } else if (id == class_map.background_class_id) {
        color = class_map.background_color;
      } else {
        throw mapping_error("to_rgb_raster: class id " + std::to_string(id) +
                            " has no palette entry");
      }
      for (int ch = 0; ch < 3; ++ch) channels[ch].at(c, r) = color[ch] / 255.0;
    }
  }

  if (smooth_sigma) {
    for (int ch = 0; ch < 3; ++ch) channels[ch] = gaussian_blur(channels[ch], *smooth_sigma);
  }
  return channels;
}

}  // namespace geofuse
