#pragma once

#include <cstddef>
#include <functional>

namespace nextjump {

// Worker count from NEXTJUMP_THREADS (0 or unset = hardware concurrency).
unsigned thread_count();

// Runs fn(i) for i in [0, n) on up to thread_count() workers. Each index is handled by exactly
// one worker; callers write results into slot i so the outcome does not depend on scheduling.
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace nextjump
