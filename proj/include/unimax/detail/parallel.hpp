#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace unimax {

// Number of worker threads for grid scans. Results never depend on it.
struct Parallelism {
  std::size_t threads = 1;
};

namespace detail {

// Splits [0, count) into contiguous chunks, one per thread. fn(begin, end)
// must only write to slots it owns; reductions happen in the caller.
template <class Fn>
void parallel_for(std::size_t count, Parallelism par, Fn&& fn) {
  std::size_t threads = par.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : par.threads;
  threads = std::min(threads, std::max<std::size_t>(1, count / 1024));
  if (threads <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(count, t * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Same as parallel_for but for coarse-grained items (one task per item is
// worthwhile, e.g. one sphere direction per item).
template <class Fn>
void parallel_items(std::size_t count, Parallelism par, Fn&& fn) {
  std::size_t threads = par.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : par.threads;
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail
}  // namespace unimax
