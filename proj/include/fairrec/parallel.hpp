#pragma once

#include <cstddef>
#include <functional>

namespace fairrec {

// Calls fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
// concurrency). Indices are claimed dynamically; callers write results into
// slot i, so output does not depend on scheduling. The first exception thrown
// by any task is rethrown after all workers have joined.
void ParallelFor(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace fairrec
