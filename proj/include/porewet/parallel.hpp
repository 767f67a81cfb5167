#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace porewet {

/// Worker count: POREWET_THREADS if set and positive, else hardware concurrency.
int thread_count();
/// Overrides the worker count for this process (0 restores the default).
void set_thread_count(int n);

/// Calls fn(i) for i in [0, n). Each index is handled exactly once; callers
/// write results to per-index slots so output never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, thread_count())), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
}

} // namespace porewet
