#pragma once

#include <cstddef>
#include <functional>

namespace segsamp {

// Worker count used by parallel_for. 0 restores the hardware default.
void set_worker_count(unsigned n);
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
// write results into per-index slots so output never depends on scheduling.
// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace segsamp
