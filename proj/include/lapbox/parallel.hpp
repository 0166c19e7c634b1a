#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace lapbox {

// Resolves the worker count: explicit argument wins, then LAPBOX_THREADS,
// then the hardware count. Always at least 1.
inline int resolve_thread_count(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LAPBOX_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static block split of [0, n). The body receives (begin, end) of its block.
// Results must be written to disjoint slots so the partition order cannot
// change any output bit.
inline void parallel_blocks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    int workers = threads > 0 ? threads : 1;
    if (static_cast<std::size_t>(workers) > n) workers = static_cast<int>(n);
    if (workers == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = n / workers;
    std::size_t rem = n % workers;
    std::size_t begin = 0;
    for (int w = 0; w < workers; ++w) {
        std::size_t len = chunk + (static_cast<std::size_t>(w) < rem ? 1 : 0);
        std::size_t end = begin + len;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
        begin = end;
    }
    for (auto& t : pool) t.join();
}

}  // namespace lapbox
