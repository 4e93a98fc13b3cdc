#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace trigzero {

/// Worker count: TRIGZERO_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
inline unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TRIGZERO_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return hw;
}

/// Runs body(i) for i in [0, count) on up to thread_count() workers.
/// Each index is visited exactly once; results must be written to
/// index-keyed slots so that reductions can be done afterwards in index order.
/// The first exception thrown by any body is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace trigzero
