#pragma once

#include <cstddef>
#include <functional>

namespace dampwave {

/// Worker count: DAMPWAVE_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Calls body(i) for i in [0, count) on up to `workers` threads (0 = worker_count()).
/// Indices are handed out dynamically; callers write results into slot i so the
/// output does not depend on scheduling. The first exception thrown by any body is
/// rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned workers = 0);

}  // namespace dampwave
