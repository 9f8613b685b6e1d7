#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace corrdyn::detail {

inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(lo, hi) over [0, total) split into bands of the given size, pulled
// by workers from an atomic ticket. Output determinism is the callee's job:
// bands must write disjoint state. First exception wins and is rethrown on
// the calling thread.
inline void parallel_bands(int total, int band_size, int workers,
                           const std::function<void(int, int)>& fn) {
  if (total <= 0) return;
  if (band_size < 1) band_size = 1;
  const int n_bands = (total + band_size - 1) / band_size;
  if (workers < 1) workers = 1;

  if (workers == 1 || n_bands == 1) {
    for (int b = 0; b < n_bands; ++b)
      fn(b * band_size, std::min(total, (b + 1) * band_size));
    return;
  }

  std::atomic<int> ticket{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto run = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const int b = ticket.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_bands) return;
      try {
        fn(b * band_size, std::min(total, (b + 1) * band_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace corrdyn::detail
