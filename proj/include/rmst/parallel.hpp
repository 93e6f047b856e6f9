#pragma once

#include <functional>

namespace rmst {

// Runs fn(0..n_tasks-1) on up to `jobs` threads. Tasks are dispatched by an
// atomic counter and must write only to their own output slots, so results
// do not depend on the worker count. The first exception thrown by a task
// is rethrown on the calling thread after all workers join.
void parallel_for(int n_tasks, int jobs, const std::function<void(int)>& fn);

// Job-count resolution: explicit value if > 0, else RMST_JOBS env var,
// else hardware concurrency (at least 1).
int resolve_jobs(int requested);

}  // namespace rmst
