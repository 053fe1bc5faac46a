#pragma once

#include <cstddef>
#include <functional>

namespace nlheat {

// Worker cap shared by all modules. 0 means hardware concurrency.
void set_max_workers(unsigned n);
unsigned max_workers();

// Runs fn(i) for i in [0, count). Work is split into contiguous chunks; callers
// must write results to per-index slots so the outcome does not depend on the
// number of workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace nlheat
