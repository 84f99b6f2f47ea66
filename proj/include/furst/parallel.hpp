#pragma once

#include <cstddef>
#include <functional>

namespace furst {

/// Worker count: the FURST_THREADS environment variable if set (clamped to
/// at least 1), otherwise the hardware concurrency.
std::size_t thread_budget();

/// Runs fn(i) for every i in [0, n) on up to thread_budget() workers.
/// Callers must write results into slots indexed by i; merging slot arrays
/// afterwards is then independent of the scheduling order, which keeps all
/// estimators byte-reproducible under any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace furst
