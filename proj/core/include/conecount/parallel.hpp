#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace conecount {

int default_threads();
int resolve_threads(int requested);

// Runs fn(i) for i in [0, count) on up to `threads` workers and returns the
// results in index order, so the output never depends on scheduling.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t count, int threads, Fn fn) {
  std::vector<R> out(count);
  threads = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace conecount
