#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace bmf {

/// Worker count from BMF_THREADS; defaults to 1.
inline int thread_count() {
  static const int count = [] {
    if (const char* env = std::getenv("BMF_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    return 1;
  }();
  return count;
}

/// Runs fn(begin, end) over contiguous chunks of [0, n).
///
/// Every output written by fn must be owned by exactly one index so the
/// result is independent of the chunking.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
  const int workers = static_cast<int>(std::min<long>(thread_count(), n));
  if (workers <= 1 || n < 64) {
    fn(0L, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const long chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const long begin = w * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0L, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace bmf
