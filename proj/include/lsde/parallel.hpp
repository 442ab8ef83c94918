#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lsde {

// Worker count from LSDE_THREADS (default: hardware concurrency, at least 1).
std::size_t parallelism_degree();

// Runs f(i) for i in [0, n) on `threads` workers. Work items must write only
// to their own slot; the first exception is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t threads = parallelism_degree()) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t t = threads < n ? threads : n;
  pool.reserve(t);
  for (std::size_t k = 0; k < t; ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lsde
