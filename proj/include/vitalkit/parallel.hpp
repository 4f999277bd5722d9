#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace vitalkit {

// Worker count: VITALKIT_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

// Evaluates fn(i) for i in [0, n) across workers. Each slot is written by exactly
// one call, so the output does not depend on scheduling.
std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& fn);

// Generic form for callers that fill their own per-index storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace vitalkit
