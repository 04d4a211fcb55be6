// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <functional>

namespace ouevolve {

/// Worker count: OU_EVOLVE_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n). Each index runs exactly once; callers write
/// results into per-index slots and reduce afterwards in index order, so the
/// outcome does not depend on the worker count. Nested calls run inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ouevolve
