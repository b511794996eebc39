#pragma once

#include <cstddef>
#include <functional>

namespace swirl {

/// Worker count from the SWIRL_THREADS environment variable, falling back to
/// std::thread::hardware_concurrency().
unsigned thread_count();

/// Runs body(k) for k in [0, n) on thread_count() workers. Iterations must
/// not write shared state. The first exception thrown is rethrown here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace swirl
