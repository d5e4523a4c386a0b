#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace missmass {

// Number of worker threads; 0 means "use the hardware concurrency".
struct Workers {
  unsigned count = 0;

  unsigned resolved() const {
    if (count != 0) return count;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
};

// Runs body(i) for every i in [0, n). Work items are claimed dynamically,
// so callers must write results into slot i and reduce afterwards in index
// order; that keeps every reduction independent of the worker count.
// The first exception thrown by any item is rethrown on the caller thread.
template <typename Body>
void parallel_for(std::size_t n, Workers workers, Body&& body) {
  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::size_t>(workers.resolved(), std::max<std::size_t>(n, 1)));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace missmass
