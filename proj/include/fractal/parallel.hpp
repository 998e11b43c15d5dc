#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fractal {

// Runs fn(i) for i in [0, count) on up to `workers` threads.
//
// Results must be written to index-addressed storage by the caller; the
// work distribution is an atomic ticket, so which thread runs which index
// is unspecified but the set of side effects per index is fixed. All
// reductions over the outputs happen sequentially at the call site, which
// is what keeps every pipeline output bit-identical across worker counts.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    const std::size_t n_threads = std::min(workers, count);
    std::atomic<std::size_t> ticket{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto body = [&]() {
        while (true) {
            const std::size_t i = ticket.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fractal
