// Minimal fork-join helper. Thread count comes from TORIC_THREADS when set,
// otherwise std::thread::hardware_concurrency().
#pragma once

#include <cstddef>
#include <functional>

namespace toric {

unsigned worker_count();

/// Calls body(i) for i in [0, count) across worker threads. Callers write
/// into per-index slots, so results do not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace toric
