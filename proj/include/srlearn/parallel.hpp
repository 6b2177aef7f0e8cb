#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace srlearn {

/// Runs body(0..count-1) in any order; results must be written by index.
using ParallelFor = std::function<void(int count, const std::function<void(int)>& body)>;

inline void serial_for(int count, const std::function<void(int)>& body) {
  for (int i = 0; i < count; ++i) body(i);
}

/*
 * Worker threads pulling indices from a shared counter. An exception thrown
 * by any task is rethrown after all workers stop; when several tasks throw,
 * the one with the lowest index wins so failures are reproducible.
 */
inline ParallelFor thread_pool_for(int jobs) {
  if (jobs <= 1) return serial_for;
  return [jobs](int count, const std::function<void(int)>& body) {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
    auto worker = [&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> threads;
    const int n = std::min(jobs, count);
    for (int t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  };
}

}  // namespace srlearn
