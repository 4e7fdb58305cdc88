#pragma once

// Data-parallel loop over independent work items within one rank.

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace fpx {

/// Worker threads per rank: FPX_THREADS if set and positive, else 1.
inline int default_thread_count() {
  if (const char* s = std::getenv("FPX_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  return 1;
}

/// Calls fn(begin, end) on contiguous static chunks of [0, n). Each item must
/// write only its own output slot; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  const std::size_t t = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  if (t <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  pool.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    const std::size_t b = n * w / t, e = n * (w + 1) / t;
    pool.emplace_back([&, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace fpx
