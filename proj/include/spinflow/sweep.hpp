#pragma once

// Work queue for embarrassingly parallel grid evaluation. Results are stored
// by grid index, so output order (and content) is identical for any thread
// count.

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace spinflow {

inline int default_thread_count() {
  if (const char* env = std::getenv("SPINFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

template <typename Fn>
void parallel_for(size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int count = std::min<size_t>(threads, n);
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace spinflow
