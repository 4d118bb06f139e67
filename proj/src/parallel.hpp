#ifndef SOFTPOU_PARALLEL_HPP
#define SOFTPOU_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace softpou {

// Worker count: --threads / softpou_set_threads wins, else SOFTPOU_THREADS,
// else hardware concurrency.
inline std::atomic<int>& thread_override() {
    static std::atomic<int> n{0};
    return n;
}

inline void set_thread_count(int n) { thread_override().store(n); }

inline int thread_count() {
    const int forced = thread_override().load();
    if (forced > 0) return forced;
    if (const char* env = std::getenv("SOFTPOU_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(std::min(hw, 16u));
}

// Runs fn(i) for i in [0, n). Results must be written to preallocated
// per-index slots; callers reduce serially afterwards so the outcome does not
// depend on the worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::size_t(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 8));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            try {
                for (;;) {
                    const std::size_t begin = cursor.fetch_add(chunk);
                    if (begin >= n) return;
                    const std::size_t end = std::min(n, begin + chunk);
                    for (std::size_t i = begin; i < end; ++i) fn(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                cursor.store(n); // stop remaining work
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace softpou

#endif
