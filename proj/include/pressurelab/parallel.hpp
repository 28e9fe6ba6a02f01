#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "pressurelab/common.hpp"

namespace pressurelab {

/// Worker count resolution: the PRESSURELAB_WORKERS environment variable
/// overrides, otherwise hardware concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("PRESSURELAB_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1) return w;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

/// Runs fn(i) for i in [0, n_chunks).  The chunk grid is fixed by the caller
/// and each chunk writes to its own slot, so results do not depend on the
/// worker count; only scheduling does.  Exceptions from workers are rethrown
/// on the calling thread (first one wins).
inline void run_chunks(int n_chunks, int workers,
                       const std::function<void(int)>& fn) {
  if (n_chunks <= 0) return;
  if (workers <= 1 || n_chunks == 1) {
    for (int i = 0; i < n_chunks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  int nthreads = std::min(workers, n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n_chunks;) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pressurelab
