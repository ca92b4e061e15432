#pragma once

#include <cstddef>
#include <functional>

namespace biohybrid {

// Number of workers to use for `requested` (0 means hardware concurrency).
int resolve_threads(int requested);

// Calls fn(i) for every i in [0, n) on up to `threads` workers. Work items are
// handed out in index order; the first exception thrown by any item is
// rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace biohybrid
