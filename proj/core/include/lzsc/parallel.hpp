#pragma once

#include <cstddef>
#include <functional>

namespace lzsc {

/// Worker count: LZSC_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Calls fn(i) for every i in [0, n) on up to `threads` workers (0 means
/// thread_count()). Returns after all calls finish; the first exception thrown
/// by any call is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

}  // namespace lzsc
