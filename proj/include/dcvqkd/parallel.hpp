#pragma once

#include <cstddef>
#include <functional>

namespace dcvqkd {

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Each index is visited exactly once; results written by
/// index are therefore independent of the worker count. The first exception
/// thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace dcvqkd
