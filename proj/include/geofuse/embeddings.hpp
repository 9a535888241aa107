#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geofuse/ascii_grid.hpp"  // line/field helpers
#include "geofuse/errors.hpp"
#include "geofuse/linalg.hpp"

namespace geofuse {

/// Rows of embedding vectors with a group label and the coordinates they were
/// encoded from. All vectors share one length.
struct EmbeddingRow {
  double lat = 0.0;
  double lon = 0.0;
  std::string group;
  std::vector<double> vec;
};

struct EmbeddingSet {
  std::vector<EmbeddingRow> rows;

  size_t dim() const { return rows.empty() ? 0 : rows[0].vec.size(); }

  void validate() const {
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i].vec.size() != rows[0].vec.size())
        throw shape_error("embedding set: row " + std::to_string(i) + " has mismatched length");
  }
};

namespace detail {

inline double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b,
                     const std::string& what) {
  double na = vec_norm(a), nb = vec_norm(b);
  if (na == 0.0 || nb == 0.0) throw degenerate_error(what + ": zero-norm vector");
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / (na * nb);
}

}  // namespace detail

/// Pairwise cosine similarity between group means. Groups are ordered by
/// label (lexicographic) for reproducible output.
struct GroupSimilarity {
  std::vector<std::string> groups;
  Mat matrix;  // symmetric, unit diagonal
};

inline GroupSimilarity pairwise_cosine(const EmbeddingSet& set) {
  set.validate();
  if (set.rows.empty()) throw parameter_error("pairwise_cosine: empty embedding set");
  std::map<std::string, std::pair<std::vector<double>, size_t>> sums;
  for (const auto& row : set.rows) {
    auto& [sum, count] = sums[row.group];
    if (sum.empty()) sum.assign(set.dim(), 0.0);
    for (size_t i = 0; i < row.vec.size(); ++i) sum[i] += row.vec[i];
    ++count;
  }

  GroupSimilarity out;
  std::vector<std::vector<double>> means;
  for (auto& [label, entry] : sums) {
    out.groups.push_back(label);
    auto& [sum, count] = entry;
    for (double& v : sum) v /= static_cast<double>(count);
    means.push_back(std::move(sum));
  }
  size_t g = means.size();
  out.matrix = Mat(g, g);
  for (size_t a = 0; a < g; ++a) {
    out.matrix(a, a) = 1.0;
    for (size_t b = a + 1; b < g; ++b) {
      double c = detail::cosine(means[a], means[b],
                                "pairwise_cosine group '" + out.groups[a] + "' vs '" + out.groups[b] + "'");
      out.matrix(a, b) = c;
      out.matrix(b, a) = c;
    }
  }
  return out;
}

/// Per-row cosine distance (1 - cosine similarity) to a fixed reference.
inline std::vector<double> cosine_distance_map(const EmbeddingSet& set,
                                               const std::vector<double>& reference) {
  set.validate();
  if (detail::vec_norm(reference) == 0.0)
    throw degenerate_error("cosine_distance_map: zero-norm reference");
  std::vector<double> out;
  out.reserve(set.rows.size());
  for (size_t i = 0; i < set.rows.size(); ++i)
    out.push_back(1.0 - detail::cosine(set.rows[i].vec, reference,
                                       "cosine_distance_map row " + std::to_string(i)));
  return out;
}

/// Disagreement between two aligned sets: |d_before - d_after| per row, with
/// each distance taken against that set's own reference.
inline std::vector<double> cosine_disagreement(const EmbeddingSet& before,
                                               const EmbeddingSet& after,
                                               const std::vector<double>& ref_before,
                                               const std::vector<double>& ref_after) {
  if (before.rows.size() != after.rows.size())
    throw shape_error("cosine_disagreement: sets differ in row count");
  std::vector<double> db = cosine_distance_map(before, ref_before);
  std::vector<double> da = cosine_distance_map(after, ref_after);
  std::vector<double> out(db.size());
  for (size_t i = 0; i < db.size(); ++i) out[i] = std::abs(db[i] - da[i]);
  return out;
}

struct PcaRgbResult {
  std::vector<std::array<double, 3>> colors;  // per row, each component in [0,1]
  bool degenerate = false;                    // rank < 3: missing components padded 0.5
};

/// Projects rows onto the top-3 principal components of the mean-centered set
/// and min-maxes each component to [0,1]. Component signs are fixed so the
/// largest-magnitude loading is positive.
inline PcaRgbResult pca_rgb(const EmbeddingSet& set) {
  set.validate();
  size_t n = set.rows.size();
  size_t d = set.dim();
  if (n < 3) throw parameter_error("pca_rgb: need at least 3 rows");

  std::vector<double> mean(d, 0.0);
  for (const auto& row : set.rows)
    for (size_t j = 0; j < d; ++j) mean[j] += row.vec[j];
  for (double& v : mean) v /= static_cast<double>(n);

  Mat cov(d, d);
  for (const auto& row : set.rows)
    for (size_t i = 0; i < d; ++i) {
      double ci = row.vec[i] - mean[i];
      for (size_t j = i; j < d; ++j) cov(i, j) += ci * (row.vec[j] - mean[j]);
    }
  for (size_t i = 0; i < d; ++i)
    for (size_t j = i; j < d; ++j) {
      cov(i, j) /= static_cast<double>(n - 1);
      cov(j, i) = cov(i, j);
    }

  EigenDecomposition eig = jacobi_eigen_symmetric(cov);
  double max_eig = std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);
  double rank_tol = std::max(1e-12, max_eig * 1e-10);

  PcaRgbResult out;
  out.colors.assign(n, {0.5, 0.5, 0.5});
  for (int comp = 0; comp < 3; ++comp) {
    if (comp >= static_cast<int>(d) || eig.values[comp] <= rank_tol) {
      out.degenerate = true;  // rank < 3: this component stays 0.5
      continue;
    }
    // Sign convention: flip so the largest-magnitude loading is positive.
    size_t arg = 0;
    for (size_t i = 1; i < d; ++i)
      if (std::abs(eig.vectors(i, comp)) > std::abs(eig.vectors(arg, comp))) arg = i;
    double sign = eig.vectors(arg, comp) < 0.0 ? -1.0 : 1.0;

    std::vector<double> coord(n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (size_t j = 0; j < d; ++j) s += (set.rows[r].vec[j] - mean[j]) * eig.vectors(j, comp);
      coord[r] = s * sign;
      lo = std::min(lo, coord[r]);
      hi = std::max(hi, coord[r]);
    }
    if (!(hi > lo)) {
      out.degenerate = true;
      continue;
    }
    for (size_t r = 0; r < n; ++r) out.colors[r][comp] = (coord[r] - lo) / (hi - lo);
  }
  return out;
}

// --- CSV interface: lat,lon,group,v0,...,v{D-1} ---------------------------

inline std::string write_embedding_csv(const EmbeddingSet& set) {
  set.validate();
  std::string out = "lat,lon,group";
  for (size_t j = 0; j < set.dim(); ++j) out += ",v" + std::to_string(j);
  out += "\n";
  char buf[64];
  for (const auto& row : set.rows) {
    if (row.group.find_first_of(",\n") != std::string::npos)
      throw format_error("embedding csv: group labels must not contain commas or newlines");
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", row.lat, row.lon);
    out += buf;
    out += "," + row.group;
    for (double v : row.vec) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline EmbeddingSet read_embedding_csv(std::string_view text) {
  EmbeddingSet set;
  auto lines = detail::split_lines(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (line.empty()) continue;
    if (li == 0 && line.substr(0, 4) == "lat,") continue;  // header
    std::vector<std::string_view> cells;
    size_t start = 0;
    while (start <= line.size()) {
      size_t comma = line.find(',', start);
      if (comma == std::string_view::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (cells.size() < 4)
      throw parse_error("embedding csv line " + std::to_string(li + 1) + ": expected lat,lon,group,v0,...");
    EmbeddingRow row;
    if (!detail::parse_double(cells[0], row.lat) || !detail::parse_double(cells[1], row.lon))
      throw parse_error("embedding csv line " + std::to_string(li + 1) + ": bad coordinates");
    row.group = std::string(cells[2]);
    row.vec.reserve(cells.size() - 3);
    for (size_t i = 3; i < cells.size(); ++i) {
      double v;
      if (!detail::parse_double(cells[i], v))
        throw parse_error("embedding csv line " + std::to_string(li + 1) + ": bad value '" +
                          std::string(cells[i]) + "'");
      row.vec.push_back(v);
    }
    set.rows.push_back(std::move(row));
  }
  set.validate();
  return set;
}

}  // namespace geofuse
