#pragma once
// Minimal index-parallel loop. Work items must be independent and write only
// to their own slots; results are then identical for any worker count.

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eclsm {

template <class F>
inline void parallel_for(int n, int workers, F&& body) {
  if (workers < 1) workers = 1;
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0) workers = std::min<int>(workers, static_cast<int>(hw));
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace eclsm
