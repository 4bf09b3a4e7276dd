#pragma once

#include <cstddef>
#include <thread>
#include <vector>

// Minimal fork-join helper. Work is split by index, results are written to
// per-index slots by the caller, and any reduction is done sequentially in
// index order afterwards -- so the outcome never depends on the worker count.

namespace sheetlab {

inline unsigned& worker_count_ref() {
    static unsigned count = std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1;
    return count;
}

inline unsigned worker_count() { return worker_count_ref(); }
inline void set_worker_count(unsigned n) { worker_count_ref() = n ? n : 1; }

template <typename F>
void parallel_for(std::size_t n, F&& body) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (unsigned w = 0; w < used; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += used) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace sheetlab
