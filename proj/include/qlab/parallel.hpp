#pragma once

#include <cstddef>
#include <functional>

namespace qlab {

/// Calls fn(i) for every i in [0, n) on up to `workers` threads (0 means
/// hardware concurrency). Work items are independent; callers write results
/// by index so output never depends on the worker count. The first exception
/// thrown by any item is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace qlab
