#pragma once

#include <cstddef>
#include <functional>

namespace corebank {

// Worker cap from the CB_THREADS environment variable, falling back to the
// hardware concurrency. Always at least 1.
std::size_t worker_count();

// Runs body(i) for i in [0, n), splitting the range into contiguous chunks
// across worker_count() threads. body must not touch shared mutable state.
// The first exception thrown by any chunk is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace corebank
