#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace tou {

/// Worker count: hardware concurrency, capped by TOU_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 means
/// worker_count()). Each index is handled exactly once; any ordering of
/// results is the caller's responsibility.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace tou
