#pragma once

#include <cstddef>
#include <functional>

namespace lls {

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Indices are claimed dynamically; callers write results by
/// index so the outcome does not depend on scheduling. The exception from the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int resolve_threads(int requested);

}  // namespace lls
