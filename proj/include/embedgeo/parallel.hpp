#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace embedgeo {

/// Worker count: explicit request if > 0, else EMBEDGEO_THREADS, else the
/// hardware concurrency.
unsigned resolve_threads(int requested = 0);

/// Runs fn(begin, end, worker) over contiguous chunks of [0, n). Chunk
/// boundaries depend on the worker count, so fn must write only to
/// per-index or per-worker state for results to be schedule-independent.
template <typename Fn>
void parallel_for_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  unsigned workers = threads == 0 ? 1u : threads;
  if (workers > n) workers = static_cast<unsigned>(n);
  if (workers == 1) {
    fn(std::size_t{0}, n, 0u);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t begin = n * w / workers;
    std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end, w] {
      try {
        fn(begin, end, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Per-index convenience wrapper around parallel_for_chunks.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  parallel_for_chunks(n, threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace embedgeo
