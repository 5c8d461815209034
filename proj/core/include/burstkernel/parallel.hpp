// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace burstkernel {

/// Worker cap used by every parallel loop in the library. Defaults to the
/// hardware concurrency; values < 1 reset to that default.
void set_max_threads(int threads);
int max_threads();

/// Runs body(i) for i in [begin, end), splitting the range into contiguous
/// chunks over at most max_threads() workers. Each index is visited by
/// exactly one worker, so per-index results do not depend on the thread
/// count. The first exception thrown by a worker is rethrown.
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& body);

}  // namespace burstkernel
