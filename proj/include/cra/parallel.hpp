#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cra {

/// Runs fn(i) for i in [0, count) on a small worker pool. Task order is by
/// index; callers keep determinism by writing into slot i. The first
/// exception is rethrown after all workers join.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min(threads, count);
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace cra
