#pragma once

#include <cstddef>
#include <functional>

namespace ssnet {

// 0 means one worker per hardware thread (at least 1).
unsigned resolve_threads(int requested);

// Calls body(i) for every i in [0, count) on up to `threads` workers,
// indices handed out in increasing order. With threads <= 1 the loop runs
// on the calling thread. The first exception thrown by any body is
// rethrown after all workers have joined; remaining indices are skipped.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace ssnet
