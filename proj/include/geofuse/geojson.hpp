#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "geofuse/geometry.hpp"

namespace geofuse {

namespace detail {

inline Point json_position(const nlohmann::json& pos, size_t feature_index) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
    throw parse_error("feature " + std::to_string(feature_index) + ": malformed position");
  return Point{pos[0].get<double>(), pos[1].get<double>()};
}

inline Ring json_ring(const nlohmann::json& arr, size_t feature_index) {
  Ring ring;
  if (!arr.is_array()) throw parse_error("feature " + std::to_string(feature_index) + ": ring is not an array");
  for (const auto& pos : arr) ring.push_back(json_position(pos, feature_index));
  return ring;
}

inline Polygon json_polygon(const nlohmann::json& coords, size_t feature_index) {
  Polygon poly;
  if (!coords.is_array() || coords.empty())
    throw parse_error("feature " + std::to_string(feature_index) + ": polygon has no rings");
  for (const auto& ring : coords) poly.rings.push_back(json_ring(ring, feature_index));
  return poly;
}

inline LineString json_linestring(const nlohmann::json& coords, size_t feature_index) {
  LineString ls;
  if (!coords.is_array() || coords.size() < 2)
    throw parse_error("feature " + std::to_string(feature_index) + ": linestring needs >= 2 positions");
  for (const auto& pos : coords) ls.points.push_back(json_position(pos, feature_index));
  return ls;
}

inline std::string json_property_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();  // numbers, booleans, null flattened to their JSON text
}

}  // namespace detail

/// Parses an RFC 7946 FeatureCollection (Point/LineString/Polygon and their
/// Multi* forms). Multi-part geometries are exploded into single-part
/// features sharing the parent's properties; property values are flattened
/// to strings. Errors cite the 0-based feature index.
inline VectorLayer parse_geojson(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("geojson: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
    throw parse_error("geojson: expected a FeatureCollection with a 'features' array");

  VectorLayer layer;
  const auto& features = doc["features"];
  if (!features.is_array()) throw parse_error("geojson: 'features' is not an array");

  for (size_t fi = 0; fi < features.size(); ++fi) {
    const auto& f = features[fi];
    auto err = [&](const std::string& what) {
      return parse_error("feature " + std::to_string(fi) + ": " + what);
    };
    if (!f.is_object() || f.value("type", "") != "Feature") throw err("not a Feature object");
    if (!f.contains("geometry") || !f["geometry"].is_object()) throw err("missing geometry");

    std::map<std::string, std::string> props;
    if (f.contains("properties") && f["properties"].is_object())
      for (auto it = f["properties"].begin(); it != f["properties"].end(); ++it)
        props[it.key()] = detail::json_property_string(it.value());

    const auto& geom = f["geometry"];
    std::string type = geom.value("type", "");
    if (!geom.contains("coordinates")) throw err("geometry has no coordinates");
    const auto& coords = geom["coordinates"];

    std::vector<Geometry> parts;
    if (type == "Point") {
      parts.emplace_back(detail::json_position(coords, fi));
    } else if (type == "LineString") {
      parts.emplace_back(detail::json_linestring(coords, fi));
    } else if (type == "Polygon") {
      parts.emplace_back(detail::json_polygon(coords, fi));
    } else if (type == "MultiPoint") {
      for (const auto& p : coords) parts.emplace_back(detail::json_position(p, fi));
    } else if (type == "MultiLineString") {
      for (const auto& l : coords) parts.emplace_back(detail::json_linestring(l, fi));
    } else if (type == "MultiPolygon") {
      for (const auto& p : coords) parts.emplace_back(detail::json_polygon(p, fi));
    } else {
      throw err("unsupported geometry type '" + type + "'");
    }

    for (auto& part : parts) {
      Feature out{std::move(part), props};
      validate_feature(out, fi);
      layer.features.push_back(std::move(out));
    }
  }
  return layer;
}

}  // namespace geofuse
