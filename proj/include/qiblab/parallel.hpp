#pragma once

#include <cstddef>
#include <functional>

namespace qiblab {

// Worker count: QIBLAB_THREADS if set and positive, else hardware concurrency.
unsigned thread_limit();

// Runs fn(i) for i in [0, n). Each index writes only its own outputs, so results
// do not depend on the thread count. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qiblab
