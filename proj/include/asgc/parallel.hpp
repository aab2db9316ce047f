#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace asgc {

/// Number of worker threads used when a caller passes 0.
inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items must
/// write to disjoint outputs; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace asgc
