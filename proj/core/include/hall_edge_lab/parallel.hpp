#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hel {

// Worker count resolution: explicit request > HALL_EDGE_LAB_WORKERS > 1.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HALL_EDGE_LAB_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// Index-parallel map. Each index is processed exactly once; callers write
// results into preallocated per-index slots, so the merged output is
// deterministic independent of the worker count.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  workers = resolve_workers(workers);
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nthreads = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Pairwise summation over a fixed-order buffer; deterministic and more
// accurate than naive left-to-right accumulation.
template <typename T>
T pairwise_sum(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  if (n == 0) return T{};
  if (n == 1) return v[lo];
  if (n == 2) return v[lo] + v[lo + 1];
  const std::size_t mid = lo + n / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v, 0, v.size());
}

}  // namespace hel
