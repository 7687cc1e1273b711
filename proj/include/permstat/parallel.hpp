#pragma once

#include <cstdint>
#include <functional>

namespace permstat::parallel {

// Resolves a worker count: explicit request, else PERMSTAT_THREADS, else
// hardware concurrency. Always at least 1.
unsigned resolve_threads(unsigned requested);

// Static block split of [0, n) across workers. Results must not depend on
// the split: callers write to draw-indexed slots only.
void parallel_for(std::uint64_t n, unsigned n_threads,
                  const std::function<void(std::uint64_t begin, std::uint64_t end)>& body);

}  // namespace permstat::parallel
