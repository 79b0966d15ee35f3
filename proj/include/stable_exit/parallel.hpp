#pragma once

// Deterministic parallel loops over walk indices.
//
// Work is cut into fixed-size chunks whose boundaries do not depend on the
// worker count; chunks are claimed dynamically but every result is written
// to its own slot, so merged output is identical for any number of workers.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stable_exit {

inline constexpr std::size_t kChunkSize = 1024;

/// Worker count from STABLE_EXIT_WORKERS, else hardware concurrency.
int default_worker_count();

/// Calls body(begin, end) for consecutive chunks covering [0, n). The first
/// exception thrown by any chunk stops the loop and is rethrown here.
template <class Body>
void parallel_chunks(std::size_t n, int workers, Body&& body) {
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto run = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        body(c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(chunks)));
  if (threads == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace stable_exit
