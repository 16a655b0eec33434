// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "pulsecomp/errors.hpp"

namespace pulsecomp {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Tasks must write
// only to their own output slot; the caller reduces in index order, so the
// result is independent of scheduling. The first exception wins and is
// rethrown on the calling thread.
template <typename Fn>
void parallel_for_index(std::size_t n, int workers, Fn&& fn) {
  if (workers < 1) throw DomainError("workers must be >= 1");
  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pulsecomp
