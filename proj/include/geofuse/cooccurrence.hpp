#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "geofuse/ascii_grid.hpp"
#include "geofuse/grid.hpp"

namespace geofuse {

/// Row-stochastic coarse->fine class co-occurrence matrix P(fine | coarse).
struct CoOccurrenceMatrix {
  int n_coarse = 0;
  int n_fine = 0;
  std::vector<double> probs;  // row-major, n_coarse x n_fine

  double p(int coarse, int fine) const {
    return probs[static_cast<size_t>(coarse) * n_fine + fine];
  }
  double& p(int coarse, int fine) {
    return probs[static_cast<size_t>(coarse) * n_fine + fine];
  }

  void validate() const {
    if (n_coarse <= 0 || n_fine <= 0 ||
        probs.size() != static_cast<size_t>(n_coarse) * n_fine)
      throw shape_error("cooccurrence: malformed matrix");
    for (int c = 0; c < n_coarse; ++c) {
      double sum = 0.0;
      for (int f = 0; f < n_fine; ++f) {
        if (p(c, f) < 0.0) throw data_error("cooccurrence: negative probability");
        sum += p(c, f);
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw data_error("cooccurrence: row " + std::to_string(c) + " sums to " +
                         std::to_string(sum) + ", expected 1");
    }
  }
};

/// Estimates P(fine | coarse) by counting aligned pixel pairs, with Laplace
/// smoothing epsilon. Coarse classes never observed come out as the uniform
/// row 1/n_fine; nodata pixels in either grid are skipped.
inline CoOccurrenceMatrix estimate_cooccurrence(
    const std::vector<std::pair<const Grid*, const Grid*>>& pairs,
    int n_coarse, int n_fine, double epsilon = 1e-6) {
  if (pairs.empty()) throw parameter_error("estimate_cooccurrence: need at least one grid pair");
  if (n_coarse <= 0 || n_fine <= 0)
    throw parameter_error("estimate_cooccurrence: class counts must be positive");
  if (epsilon < 0.0) throw parameter_error("estimate_cooccurrence: epsilon must be >= 0");

  std::vector<long long> joint(static_cast<size_t>(n_coarse) * n_fine, 0);
  std::vector<long long> marginal(static_cast<size_t>(n_coarse), 0);
  long long valid = 0;

  for (size_t pi = 0; pi < pairs.size(); ++pi) {
    const Grid& coarse = *pairs[pi].first;
    const Grid& fine = *pairs[pi].second;
    if (coarse.width != fine.width || coarse.height != fine.height)
      throw alignment_error("estimate_cooccurrence: pair " + std::to_string(pi) +
                            " grids differ in shape");
    for (size_t i = 0; i < coarse.size(); ++i) {
      double cv = coarse.data[i];
      double fv = fine.data[i];
      if (coarse.is_nodata(cv) || fine.is_nodata(fv)) continue;
      int c = static_cast<int>(cv);
      int f = static_cast<int>(fv);
      if (c < 0 || c >= n_coarse)
        throw data_error("estimate_cooccurrence: coarse class " + std::to_string(c) +
                         " out of range at pair " + std::to_string(pi) + " pixel " + std::to_string(i));
      if (f < 0 || f >= n_fine)
        throw data_error("estimate_cooccurrence: fine class " + std::to_string(f) +
                         " out of range at pair " + std::to_string(pi) + " pixel " + std::to_string(i));
      ++joint[static_cast<size_t>(c) * n_fine + f];
      ++marginal[static_cast<size_t>(c)];
      ++valid;
    }
  }
  if (valid == 0) throw data_error("estimate_cooccurrence: zero valid pixels");

  CoOccurrenceMatrix co;
  co.n_coarse = n_coarse;
  co.n_fine = n_fine;
  co.probs.resize(static_cast<size_t>(n_coarse) * n_fine);
  for (int c = 0; c < n_coarse; ++c) {
    double denom = static_cast<double>(marginal[c]) + n_fine * epsilon;
    for (int f = 0; f < n_fine; ++f) {
      if (denom > 0.0) {
        co.p(c, f) = (static_cast<double>(joint[static_cast<size_t>(c) * n_fine + f]) + epsilon) / denom;
      } else {
        co.p(c, f) = 1.0 / n_fine;  // never observed, epsilon == 0
      }
    }
  }
  return co;
}

/// Text serialization: header "ncoarse nfine", then one row per coarse class,
/// "%.9g" values.
inline std::string write_cooccurrence(const CoOccurrenceMatrix& co) {
  std::string out = std::to_string(co.n_coarse) + " " + std::to_string(co.n_fine) + "\n";
  char buf[64];
  for (int c = 0; c < co.n_coarse; ++c) {
    for (int f = 0; f < co.n_fine; ++f) {
      std::snprintf(buf, sizeof(buf), "%.9g", co.p(c, f));
      if (f) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline CoOccurrenceMatrix read_cooccurrence(std::string_view text) {
  auto lines = detail::split_lines(text);
  size_t li = 0;
  while (li < lines.size() && detail::split_fields(lines[li]).empty()) ++li;
  if (li >= lines.size()) throw parse_error("cooccurrence: empty input");
  auto header = detail::split_fields(lines[li]);
  if (header.size() != 2) throw parse_error("cooccurrence line " + std::to_string(li + 1) +
                                            ": expected 'ncoarse nfine'");
  double nc, nf;
  if (!detail::parse_double(header[0], nc) || !detail::parse_double(header[1], nf))
    throw parse_error("cooccurrence: non-numeric header");
  CoOccurrenceMatrix co;
  co.n_coarse = static_cast<int>(nc);
  co.n_fine = static_cast<int>(nf);
  if (co.n_coarse <= 0 || co.n_fine <= 0) throw parse_error("cooccurrence: class counts must be positive");
  co.probs.reserve(static_cast<size_t>(co.n_coarse) * co.n_fine);
  ++li;
  for (int c = 0; c < co.n_coarse; ++c, ++li) {
    while (li < lines.size() && detail::split_fields(lines[li]).empty()) ++li;
    if (li >= lines.size()) throw parse_error("cooccurrence: body ends early at row " + std::to_string(c));
    auto fields = detail::split_fields(lines[li]);
    if (fields.size() != static_cast<size_t>(co.n_fine))
      throw parse_error("cooccurrence line " + std::to_string(li + 1) + ": expected " +
                        std::to_string(co.n_fine) + " values");
    for (auto fv : fields) {
      double v;
      if (!detail::parse_double(fv, v)) throw parse_error("cooccurrence: non-numeric value");
      co.probs.push_back(v);
    }
  }
  co.validate();
  return co;
}

}  // namespace geofuse
