#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace schottky {

inline std::atomic<unsigned>& max_threads_ref() {
  static std::atomic<unsigned> n{std::max(1u, std::thread::hardware_concurrency())};
  return n;
}

inline unsigned max_threads() { return max_threads_ref().load(); }
inline void set_max_threads(unsigned n) { max_threads_ref().store(std::max(1u, n)); }

// Runs f(i) for i in [0, n). Callers write into slot i, so the result does
// not depend on the thread count. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned t = static_cast<unsigned>(std::min<std::size_t>(max_threads(), n));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < t; ++k) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace schottky
