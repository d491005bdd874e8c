#include "dpdisp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dpdisp {
namespace {

std::atomic<int> g_threads{0};

}  // namespace

void set_thread_count(int n) { g_threads.store(std::max(0, n)); }

int thread_count() {
  const int n = g_threads.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& fn) {
  const std::ptrdiff_t n = end - begin;
  if (n <= 0) return;
  const auto workers = static_cast<std::ptrdiff_t>(std::min<std::ptrdiff_t>(thread_count(), n));
  if (workers <= 1) {
    for (auto i = begin; i < end; ++i) fn(i);
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::ptrdiff_t chunk = (n + workers - 1) / workers;
  for (std::ptrdiff_t w = 0; w < workers; ++w) {
    const auto lo = begin + w * chunk;
    const auto hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (auto i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dpdisp
