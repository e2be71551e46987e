#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ymlab {

namespace detail {
inline std::atomic<int>& worker_setting() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

/// Process-wide worker cap. 0 = hardware concurrency.
inline void set_workers(int n) { detail::worker_setting() = n < 0 ? 0 : n; }

inline int workers() {
  int n = detail::worker_setting().load();
  if (n > 0) return n;
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

/// Chunked parallel map over [begin, end). Chunk boundaries depend only on the
/// worker count, so reductions built from per-chunk partials are reproducible
/// for a fixed count and exactly sequential when it is 1.
inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t n = end > begin ? end - begin : 0;
  if (n == 0) return;
  const std::size_t w = static_cast<std::size_t>(std::max(1, workers()));
  if (w == 1 || n < 2 * w) {
    body(begin, end);
    return;
  }
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t lo = begin + i * chunk;
    if (lo >= end) break;
    const std::size_t hi = std::min(end, lo + chunk);
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ymlab
