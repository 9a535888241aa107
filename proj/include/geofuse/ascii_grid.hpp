#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "geofuse/grid.hpp"

namespace geofuse {

namespace detail {

inline std::string fmt_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t eol = text.find('\n', start);
    if (eol == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, eol - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = eol + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

inline bool parse_double(std::string_view s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

inline bool ieq(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace detail

/// Parses the ASCII grid layout: header lines ncols/nrows/xllcorner/yllcorner/
/// cellsize (+ optional NODATA_value), then nrows lines of ncols numbers, top
/// row first. Parse errors name the 1-based line number.
inline Grid read_ascii_grid(std::string_view text, GridKind kind = GridKind::continuous) {
  auto lines = detail::split_lines(text);
  size_t li = 0;
  auto fail = [&](const std::string& what) -> parse_error {
    return parse_error("ascii grid line " + std::to_string(li + 1) + ": " + what);
  };

  long ncols = -1, nrows = -1;
  double xll = 0, yll = 0, cellsize = 0;
  bool have[5] = {false, false, false, false, false};
  std::optional<double> nodata;

  // Header: key value pairs until the first line that does not start with a key.
  while (li < lines.size()) {
    auto fields = detail::split_fields(lines[li]);
    if (fields.empty()) { ++li; continue; }
    std::string_view key = fields[0];
    bool is_key = detail::ieq(key, "ncols") || detail::ieq(key, "nrows") ||
                  detail::ieq(key, "xllcorner") || detail::ieq(key, "yllcorner") ||
                  detail::ieq(key, "cellsize") || detail::ieq(key, "NODATA_value");
    if (!is_key) break;
    if (fields.size() != 2) throw fail("expected 'key value'");
    double v;
    if (!detail::parse_double(fields[1], v)) throw fail("non-numeric header value");
    if (detail::ieq(key, "ncols")) { ncols = static_cast<long>(v); have[0] = true; }
    else if (detail::ieq(key, "nrows")) { nrows = static_cast<long>(v); have[1] = true; }
    else if (detail::ieq(key, "xllcorner")) { xll = v; have[2] = true; }
    else if (detail::ieq(key, "yllcorner")) { yll = v; have[3] = true; }
    else if (detail::ieq(key, "cellsize")) { cellsize = v; have[4] = true; }
    else nodata = v;
    ++li;
  }
  static const char* names[5] = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"};
  for (int i = 0; i < 5; ++i)
    if (!have[i]) throw fail(std::string("missing required key ") + names[i]);
  if (ncols <= 0 || nrows <= 0) throw fail("ncols/nrows must be positive");
  if (!(cellsize > 0)) throw fail("cellsize must be positive");

  Grid g(static_cast<int>(ncols), static_cast<int>(nrows), kind);
  g.nodata = nodata;
  g.transform.origin_x = xll;
  g.transform.origin_y = yll + static_cast<double>(nrows) * cellsize;
  g.transform.pixel_w = cellsize;
  g.transform.pixel_h = -cellsize;

  for (long r = 0; r < nrows; ++r) {
    while (li < lines.size() && detail::split_fields(lines[li]).empty()) ++li;
    if (li >= lines.size()) throw fail("body ends early: expected " + std::to_string(nrows) +
                                       " data rows, got " + std::to_string(r));
    auto fields = detail::split_fields(lines[li]);
    if (fields.size() != static_cast<size_t>(ncols))
      throw fail("expected " + std::to_string(ncols) + " values, got " + std::to_string(fields.size()));
    for (long c = 0; c < ncols; ++c) {
      double v;
      if (!detail::parse_double(fields[c], v)) throw fail("non-numeric cell value '" + std::string(fields[c]) + "'");
      g.at(static_cast<int>(c), static_cast<int>(r)) = v;
    }
    ++li;
  }
  for (; li < lines.size(); ++li)
    if (!detail::split_fields(lines[li]).empty()) throw fail("trailing data beyond declared nrows");
  return g;
}

/// Canonical serialization: fixed key order, "%.6g" numbers, LF newlines.
/// A grid that has already been through one write/read pass round-trips
/// byte-identically. Only axis-aligned square-pixel north-up transforms are
/// representable.
inline std::string write_ascii_grid(const Grid& g) {
  if (g.transform.shear_x != 0.0 || g.transform.shear_y != 0.0)
    throw format_error("ascii grid cannot represent a sheared transform");
  if (!(g.transform.pixel_w > 0.0) || g.transform.pixel_h != -g.transform.pixel_w)
    throw format_error("ascii grid requires square north-up pixels (pixel_h == -pixel_w)");
  if (g.width <= 0 || g.height <= 0 || g.data.size() != static_cast<size_t>(g.width) * g.height)
    throw shape_error("ascii grid: malformed grid");

  double cellsize = g.transform.pixel_w;
  double yll = g.transform.origin_y - static_cast<double>(g.height) * cellsize;
  std::string out;
  out.reserve(g.size() * 8 + 128);
  out += "ncols " + std::to_string(g.width) + "\n";
  out += "nrows " + std::to_string(g.height) + "\n";
  out += "xllcorner " + detail::fmt_g6(g.transform.origin_x) + "\n";
  out += "yllcorner " + detail::fmt_g6(yll) + "\n";
  out += "cellsize " + detail::fmt_g6(cellsize) + "\n";
  if (g.nodata) out += "NODATA_value " + detail::fmt_g6(*g.nodata) + "\n";
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (c) out += ' ';
      out += detail::fmt_g6(g.at(c, r));
    }
    out += '\n';
  }
  return out;
}

}  // namespace geofuse
