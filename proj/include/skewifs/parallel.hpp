#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace skewifs {

// Runs task(i) for every i in [0, n_tasks) on up to `workers` threads. Tasks
// must write only to their own output slot; callers merge in index order, so
// results never depend on the worker count.
template <typename Task>
void parallel_for(std::size_t n_tasks, unsigned workers, Task&& task) {
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(n_tasks, 256))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_tasks; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace skewifs
