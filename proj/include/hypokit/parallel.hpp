#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hypokit {

/// Worker count: hardware concurrency capped by the HYPOKIT_THREADS env var.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("HYPOKIT_THREADS")) {
        int c = std::atoi(cap);
        if (c >= 1) n = std::min(n, c);
    }
    return n;
}

/// Static block partition of [begin, end) over worker threads.
/// body(i) must be safe to run concurrently for distinct i.
inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t)>& body) {
    const std::size_t n = end > begin ? end - begin : 0;
    const int workers = worker_count();
    if (n == 0) return;
    if (workers == 1 || n < 64) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = begin + chunk * w;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace hypokit
