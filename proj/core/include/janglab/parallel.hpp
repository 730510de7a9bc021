#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace janglab {

/// Worker cap: JANGLAB_THREADS if set to a positive integer, else the hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads.
/// Results must be written to per-index slots; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace janglab
