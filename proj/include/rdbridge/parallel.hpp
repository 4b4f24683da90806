#pragma once

#include <cstddef>
#include <functional>

namespace rdbridge {

// Thread cap from RD_BRIDGE_THREADS (absent = 1). Throws InvalidInput when the
// variable is set but is not an integer >= 1.
int configured_threads();

// Overrides the environment for the current process; 0 restores env lookup.
void set_thread_override(int threads);

// Runs body(begin, end) over a static partition of [0, n). Each index is
// owned by exactly one worker, so any per-index reduction done in body is
// independent of the thread count.
void parallel_for(std::size_t n, std::size_t min_grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace rdbridge
