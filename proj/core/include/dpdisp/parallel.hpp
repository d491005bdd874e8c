#pragma once

#include <cstddef>
#include <functional>

namespace dpdisp {

/// Caps the worker count used by every parallel loop in the library.
/// 0 selects the hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [begin, end). Work is split into contiguous static
/// chunks; fn must only write state owned by index i so results do not
/// depend on scheduling.
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& fn);

}  // namespace dpdisp
