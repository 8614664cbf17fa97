#pragma once

#include <cstddef>
#include <functional>

namespace hollow {

// Batch-level parallel loop. Every index runs exactly once; bodies must only
// write to index-owned slots so results are identical for any thread count.
// jobs <= 1 is the serial reference path (also used when OpenMP is absent).
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& body);

// Serial reference loop, kept separate so tests can compare against the
// parallel path directly.
void serial_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Number of hardware workers OpenMP would use (1 without OpenMP).
int default_jobs();

}  // namespace hollow
