#pragma once

#include <cstddef>
#include <functional>

namespace evdfa::detail {

/// Worker count: EVDFA_THREADS when set and nonzero, otherwise the
/// hardware concurrency. Never less than 1.
unsigned thread_budget();

/// Splits [0, count) into contiguous chunks of at least min_chunk items and
/// runs fn(begin, end) on each, possibly on worker threads. Callers must
/// make fn write only to disjoint per-index state so the result does not
/// depend on the number of workers.
void parallel_chunks(std::size_t count, std::size_t min_chunk,
                     const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace evdfa::detail
