#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace celltrack {

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; the exception of the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (n <= 0) return;
    threads = std::clamp(threads, 1, n);
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Worker count: `requested` if positive, else CELLTRACK_THREADS, else the hardware concurrency.
int resolve_threads(int requested);

}  // namespace celltrack
