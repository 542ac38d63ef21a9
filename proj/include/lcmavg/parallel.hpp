#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lcmavg {

// Default worker count: LCMAVG_WORKERS if set, else hardware concurrency.
inline int default_worker_count() {
  if (const char* env = std::getenv("LCMAVG_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1 && n <= 1024) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(chunk, worker) for chunk in [0, n_chunks), worker in [0, workers).
// Chunks are claimed dynamically, so imbalance between chunks is absorbed by
// whichever worker is free. Each chunk must write only to its own slot;
// callers merge slots in chunk order afterwards, which keeps results
// independent of the worker count. The first exception thrown by any chunk
// is rethrown on the calling thread.
template <typename Fn>
void run_chunks(int n_chunks, int workers, Fn&& fn) {
  if (n_chunks <= 0) return;
  if (workers <= 1 || n_chunks == 1) {
    for (int c = 0; c < n_chunks; ++c) fn(c, 0);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&](int id) {
    try {
      for (;;) {
        int c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= n_chunks) return;
        fn(c, id);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      // Drain remaining chunks so the other workers stop promptly.
      next.store(n_chunks, std::memory_order_relaxed);
    }
  };
  int n_threads = std::min(workers, n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker, i);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lcmavg
