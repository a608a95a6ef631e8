#pragma once

#include <cstddef>
#include <functional>

namespace vortex {

/// Worker cap: VORTEX_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) over up to worker_count() threads.
/// Indices are statically partitioned, so any per-index output is
/// independent of the thread count. The first exception thrown by a worker
/// is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vortex
