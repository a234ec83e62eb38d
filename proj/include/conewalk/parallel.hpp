#pragma once

#include <cstddef>
#include <functional>

namespace conewalk {

/// Worker count: `requested` if nonzero, else $CONEWALK_THREADS, else the
/// hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested);

/// Runs fn(i) for i in [0, n) on `threads` workers with a static
/// interleaved partition. The first exception thrown is rethrown after all
/// workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace conewalk
