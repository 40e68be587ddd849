#pragma once

#include <cstddef>
#include <functional>

namespace gaugekit {

/// Worker count: GAUGEKIT_THREADS if set and positive, else hardware concurrency.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, n) over `threads` workers using contiguous blocks.
/// Callers write results into per-index slots, so output never depends on the
/// thread count.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace gaugekit
