#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace geofuse {

/// Worker cap: min(hardware concurrency, GEOFUSE_THREADS if set). Always >= 1.
inline int max_threads() {
  static const int cap = [] {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw ? static_cast<int>(hw) : 1;
    if (const char* env = std::getenv("GEOFUSE_THREADS")) {
      int req = std::atoi(env);
      if (req >= 1) n = std::min(n, req);
      // A request above hardware concurrency is honored too: determinism is
      // row-partitioned, so extra threads change nothing but scheduling.
      if (req > n) n = req;
    }
    return std::max(1, n);
  }();
  return cap;
}

/// Runs fn(row) for every row in [0, rows). Each row must be computable from
/// the inputs alone and write only its own output slice, so the result is
/// bit-identical to the sequential loop for any thread count.
inline void parallel_rows(int rows, const std::function<void(int)>& fn) {
  int nthreads = std::min(max_threads(), std::max(1, rows));
  if (nthreads <= 1 || rows <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nthreads));
  int chunk = (rows + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    int lo = t * chunk;
    int hi = std::min(rows, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int r = lo; r < hi; ++r) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace geofuse
