#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace mwd {

namespace detail {
inline std::atomic<int>& thread_count_storage() {
  static std::atomic<int> count{1};
  return count;
}
}  // namespace detail

/// Worker threads used by the heavy tensor kernels. Defaults to 1.
inline void set_threads(int count) {
  detail::thread_count_storage().store(std::max(1, count));
}

inline int threads() { return detail::thread_count_storage().load(); }

/// Runs fn(i) for i in [0, count). Work is split into contiguous chunks, one
/// per thread. Every index writes to its own disjoint output, so results are
/// bit-identical for any thread count.
template <typename Fn>
void parallel_for(std::int64_t count, Fn&& fn) {
  const int nthreads = std::min<std::int64_t>(threads(), count);
  if (nthreads <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  const std::int64_t chunk = (count + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mwd
