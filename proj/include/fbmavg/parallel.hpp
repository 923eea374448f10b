#pragma once

#include <cstddef>
#include <functional>

namespace fbmavg {

// Runs body(i) for i in [0, count) on `jobs` worker threads (jobs <= 0 picks
// the hardware concurrency). Each index is executed exactly once; the caller
// writes results into per-index slots, so the outcome does not depend on the
// parallelism degree.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace fbmavg
