#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace asc2end {

// Runs work(i) for every i in [0, n) on up to `workers` threads and hands each
// result to commit(i, result) strictly in index order, one call at a time.
// Output therefore never depends on scheduling. If a work item throws, no
// further items start and the first exception is rethrown after all threads
// have joined.
template <typename Result, typename Work, typename Commit>
void run_ordered(std::size_t n, std::size_t workers, Work&& work, Commit&& commit) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, n);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mutex;
  std::vector<std::optional<Result>> slots(n);
  std::size_t next_commit = 0;
  std::exception_ptr error;

  auto loop = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        Result r = work(i);
        std::lock_guard lock(mutex);
        slots[i].emplace(std::move(r));
        while (next_commit < n && slots[next_commit]) {
          commit(next_commit, std::move(*slots[next_commit]));
          slots[next_commit].reset();
          ++next_commit;
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (workers == 1) {
    loop();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(loop);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace asc2end
