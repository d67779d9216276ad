#pragma once

#include <functional>

namespace filtop {

/// Worker count: FILTOP_THREADS if set, otherwise hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [begin, end) on up to thread_count() workers.
/// Iterations are partitioned statically, so any write pattern keyed by i is
/// deterministic. The first exception thrown by a worker is rethrown.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace filtop
