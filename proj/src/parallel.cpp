#include "permstat/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace permstat::parallel {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PERMSTAT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::uint64_t n, unsigned n_threads,
                  const std::function<void(std::uint64_t, std::uint64_t)>& body) {
    if (n == 0) return;
    const std::uint64_t workers = std::min<std::uint64_t>(std::max(1u, n_threads), n);
    if (workers == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::uint64_t chunk = (n + workers - 1) / workers;
    for (std::uint64_t w = 1; w < workers; ++w) {
        const std::uint64_t begin = w * chunk;
        const std::uint64_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    body(0, std::min(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace permstat::parallel
