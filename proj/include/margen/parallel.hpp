#pragma once

#include <functional>

namespace margen {

/// Runs fn(i) for i in [0, n) across worker threads (0 = hardware count).
/// Work is split into fixed contiguous chunks, so results written to
/// per-index slots are identical for any worker count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

int resolve_thread_count(int requested);

}  // namespace margen
