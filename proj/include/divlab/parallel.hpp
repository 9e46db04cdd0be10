#pragma once

#include <cstddef>
#include <functional>

namespace divlab {

/// Worker count from DIVLAB_WORKERS, defaulting to hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, count) across worker_count() threads.
/// Iterations must write to disjoint locations; the first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace divlab
