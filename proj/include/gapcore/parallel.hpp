#pragma once

#include <cstdint>
#include <functional>

namespace gapcore {

/// Caps the number of worker threads used by parallel loops. 0 restores the
/// default (hardware concurrency).
void set_max_threads(int n);
int max_threads();

/// Runs fn(begin, end) over a static partition of [0, n) into contiguous
/// chunks, one per worker. Work items must be independent; because the
/// partition only decides which thread computes which indices, results are
/// identical for any thread count. Falls back to a plain call when n is
/// below `grain` or only one thread is available.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn,
                  int64_t grain = 2048);

} // namespace gapcore
