#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace co3 {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work is
/// split into contiguous blocks, so any per-index state must be
/// independent.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int block = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * block;
    const int hi = std::min(count, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Worker count after applying the CO3_THREADS cap; requested <= 0 means 1.
inline int resolve_threads(int requested) {
  int t = requested <= 0 ? 1 : requested;
  if (const char* cap = std::getenv("CO3_THREADS")) {
    const int c = std::atoi(cap);
    if (c >= 1) t = std::min(t, c);
  }
  return t;
}

}  // namespace co3
