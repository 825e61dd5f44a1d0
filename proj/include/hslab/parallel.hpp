#pragma once

#include <cstddef>
#include <functional>

namespace hslab {

/// Worker count: hardware concurrency, capped by the HSLAB_THREADS
/// environment variable when it holds a positive integer.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Callers write results into slot i so the outcome
/// does not depend on scheduling. After all workers finish, the exception
/// from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hslab
