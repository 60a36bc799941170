#pragma once

#include <cstddef>
#include <functional>

namespace superhedge {

/// Worker cap: min(hardware_concurrency, SUPERHEDGE_THREADS). At least 1.
std::size_t worker_count();

/// Runs fn(block_begin, block_end) over [0, n) split into fixed-size blocks.
/// Block boundaries depend only on (n, block_size), never on the worker
/// count, so per-block results can be combined in block order to give
/// bit-identical totals on any machine configuration.
void parallel_blocks(std::size_t n, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace superhedge
