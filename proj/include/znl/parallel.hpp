#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace znl {

/// Deterministic parallel loop: iterations are independent and write only to
/// their own slots, so the result is identical for any worker count.
template <typename Fn>
void parallel_for(long n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    jobs = static_cast<int>(std::min<long>(jobs, n));
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

inline int default_jobs() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace znl
