#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "geofuse/errors.hpp"
#include "geofuse/splitmix.hpp"

namespace geofuse {

/// Label-efficiency subset: which training samples a run at `fraction` sees,
/// and for how many epochs it trains. Fully determined by (n, fraction, seed).
struct SubsetPlan {
  size_t n = 0;
  double fraction = 1.0;
  uint64_t seed = 0;
  std::vector<size_t> indices;  // sorted ascending, unique
  int epochs = 0;
};

/// Epoch schedule: published table for the nine standard fractions, otherwise
/// round(7 / fraction) clamped to >= 7 (the table is 7/fraction at every row).
inline int epoch_schedule(double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw parameter_error("epoch_schedule: fraction must be in (0, 1]");
  struct Row {
    double fraction;
    int epochs;
  };
  static constexpr Row table[] = {
      {1.00, 7}, {0.75, 9}, {0.50, 14}, {0.35, 20}, {0.20, 35},
      {0.10, 70}, {0.05, 140}, {0.02, 350}, {0.01, 700},
  };
  for (const Row& row : table)
    if (std::abs(fraction - row.fraction) <= 1e-12) return row.epochs;
  long long e = std::llround(7.0 / fraction);
  return static_cast<int>(std::max<long long>(e, 7));
}

/// Seed-stable uniform subset: Fisher-Yates over [0, n) driven by SplitMix64
/// (swap partner for position i drawn with bounded(i + 1)), keep the first
/// k = max(1, round(fraction * n)), sort ascending.
inline SubsetPlan subset_sample(size_t n, double fraction, uint64_t seed) {
  if (n < 1) throw parameter_error("subset_sample: n must be >= 1");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw parameter_error("subset_sample: fraction must be in (0, 1]");

  SubsetPlan plan;
  plan.n = n;
  plan.fraction = fraction;
  plan.seed = seed;
  plan.epochs = epoch_schedule(fraction);

  size_t k = static_cast<size_t>(std::max<long long>(
      1, std::llround(fraction * static_cast<double>(n))));
  k = std::min(k, n);

  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  SplitMix64 rng(seed);
  for (size_t i = n - 1; i > 0; --i) {
    size_t j = static_cast<size_t>(rng.bounded(static_cast<uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  plan.indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(plan.indices.begin(), plan.indices.end());
  return plan;
}

/// CSV form: a comment line recording the inputs, a header, one index per row.
inline std::string write_subset_csv(const SubsetPlan& plan) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "# n=%zu fraction=%.9g seed=%llu epochs=%d\n", plan.n,
                plan.fraction, static_cast<unsigned long long>(plan.seed), plan.epochs);
  std::string out = buf;
  out += "index\n";
  for (size_t idx : plan.indices) out += std::to_string(idx) + "\n";
  return out;
}

}  // namespace geofuse
