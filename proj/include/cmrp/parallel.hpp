#pragma once

#include <thread>
#include <vector>

namespace cmrp {

// Static contiguous block partition of [0, n) over `threads` workers. The
// assignment depends only on (n, threads), never on timing, so per-block
// results can be reduced in block order for reproducible totals.
template <class Fn>
void parallel_blocks(long n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        fn(0L, n, 0);
        return;
    }
    const int workers = static_cast<int>(std::min<long>(threads, n));
    const long chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int b = 0; b < workers; ++b) {
        const long begin = b * chunk;
        const long end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end, b] { fn(begin, end, b); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace cmrp
