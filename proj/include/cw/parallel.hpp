#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "cw/numerics.hpp"

namespace cw {

/// Worker count: explicit argument wins, then the CW_THREADS environment
/// variable, then the hardware. Always at least one.
inline int worker_count(int requested = 0) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("CW_THREADS")) {
      try {
        n = std::stoi(env);
      } catch (...) {
        n = 0;
      }
    }
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

/// Applies fn(index) for index in [0, count) across workers. Results are for
/// the caller to place by index, so the output order never depends on the
/// schedule. Exceptions are rethrown (first one wins) after all workers join.
template <class Fn>
void parallel_for_index(int count, Fn&& fn, int requested_threads = 0) {
  if (count <= 0) return;
  const int workers = std::min(worker_count(requested_threads), count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cw
