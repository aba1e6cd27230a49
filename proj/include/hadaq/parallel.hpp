#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hadaq {

inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs job(i) for i in [0, n_jobs) on up to n_threads workers. Jobs must
/// write results into pre-sized slots indexed by i so the outcome does not
/// depend on scheduling. The first exception thrown by any job is rethrown.
inline void parallel_for(int n_jobs, int n_threads,
                         const std::function<void(int)>& job) {
  if (n_threads <= 1 || n_jobs <= 1) {
    for (int i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::mutex mu;
  int next = 0;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      int i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n_jobs || first_error) return;
        i = next++;
      }
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min(n_threads, n_jobs);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hadaq
