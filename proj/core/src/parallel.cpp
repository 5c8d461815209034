// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace burstkernel {
namespace {

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{default_threads()};
  return cap;
}

}  // namespace

void set_max_threads(int threads) {
  thread_cap().store(threads < 1 ? default_threads() : threads);
}

int max_threads() { return thread_cap().load(); }

void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& body) {
  const std::ptrdiff_t n = end - begin;
  if (n <= 0) return;
  const auto workers = static_cast<std::ptrdiff_t>(
      std::min<std::ptrdiff_t>(max_threads(), n));
  if (workers <= 1) {
    for (std::ptrdiff_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
    try {
      for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  const std::ptrdiff_t chunk = (n + workers - 1) / workers;
  for (std::ptrdiff_t w = 1; w < workers; ++w) {
    const std::ptrdiff_t lo = begin + w * chunk;
    const std::ptrdiff_t hi = std::min(end, lo + chunk);
    if (lo < hi) pool.emplace_back(run, lo, hi);
  }
  run(begin, std::min(end, begin + chunk));
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace burstkernel
