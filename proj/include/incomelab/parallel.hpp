#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace incomelab {

/// Runs body(block_index) for every block on a fixed pool of threads.
/// Blocks must write disjoint outputs; results then do not depend on scheduling.
template <class Body>
void parallel_for_blocks(std::size_t n_blocks, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(n_blocks, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) body(b);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < n_blocks; b += workers) body(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace incomelab
