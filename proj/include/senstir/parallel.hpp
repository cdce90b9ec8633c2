#pragma once

#include <functional>

namespace senstir {

// Worker threads to use: SENSTIR_THREADS when set (clamped to >= 1), else the
// hardware concurrency.
int worker_count();

// Runs fn(0), ..., fn(n-1), possibly across threads. Callers must write only
// to per-index slots so results do not depend on the worker count; the first
// exception thrown by any task is rethrown.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace senstir
