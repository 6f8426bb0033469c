#pragma once

#include <cstddef>
#include <functional>

namespace rrho {

// Number of worker threads: min(hardware, RRHO_THREADS env var if set).
int thread_budget();

// Runs fn(i) for i in [0, n). Work is split into fixed contiguous chunks so
// results written to per-index slots are identical for any thread count.
// Falls back to a serial loop when n*cost_hint is small.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t min_items_per_thread = 1);

}  // namespace rrho
