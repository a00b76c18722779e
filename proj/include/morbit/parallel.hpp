#pragma once

// Deterministic parallel-for over an index range. Worker count comes from
// MONOPOLE_ORBITS_THREADS when set, else hardware_concurrency. Work items
// must be independent; reductions the caller performs must be order-free.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace morbit {

inline int worker_count() {
    if (const char* env = std::getenv("MONOPOLE_ORBITS_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

template <class Fn>
inline void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(worker_count(), std::max(1, n));
    if (workers == 1 || n < 2) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace morbit
