#pragma once

#include <cstddef>
#include <functional>

namespace rembed {

/// Caps the number of worker threads used by internal kernels (0 = hardware concurrency).
/// Results never depend on this value; only wall time does.
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Splits [0, n) into contiguous ranges and runs body(begin, end) on each, possibly
/// concurrently. Every index is visited by exactly one call. Ranges below `grain`
/// elements are not split further.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain = 1);

}  // namespace rembed
