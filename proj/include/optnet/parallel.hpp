#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace optnet {

/// Runs fn(0..n-1) across up to `jobs` worker threads. Tasks are claimed
/// from an atomic counter; callers must make task outputs independent of
/// completion order (write into preallocated slots). The first exception
/// is rethrown on the calling thread after all workers join.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, const Fn& fn) {
    if (n == 0) return;
    if (jobs == 0) jobs = 1;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace optnet
