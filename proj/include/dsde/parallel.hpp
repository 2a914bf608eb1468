#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace dsde {

// Worker count used by parallel_* helpers. 0 = hardware concurrency.
inline std::atomic<unsigned>& detail_thread_count() {
    static std::atomic<unsigned> v{0};
    return v;
}
inline void set_thread_count(unsigned n) { detail_thread_count() = n; }
inline unsigned thread_count() {
    unsigned v = detail_thread_count();
    if (v == 0) {
        v = std::thread::hardware_concurrency();
        if (v == 0) v = 1;
    }
    return v;
}

// Runs fn(block_index, begin, end) over [0, n) split into fixed-size blocks.
// Block boundaries depend only on n and block_size, never on the worker
// count, so any per-block results combined in block order are reproducible.
inline void parallel_blocks(std::size_t n, std::size_t block_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t blocks = (n + block_size - 1) / block_size;
    unsigned workers = thread_count();
    if (workers <= 1 || blocks == 1) {
        for (std::size_t b = 0; b < blocks; ++b)
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= blocks) return;
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

// Convenience: one item per block.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    parallel_blocks(n, 1, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

}  // namespace dsde
