#pragma once

#include <cstddef>
#include <functional>

namespace expjump {

// Worker count: hardware concurrency capped by the EXPJUMP_THREADS variable.
unsigned worker_count();

// Runs body(i) for i in [0, n) on worker_count() threads. Each index is
// processed exactly once; the first exception is rethrown after joining.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace expjump
