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

namespace ssmap {

/// Worker count: `requested` if non-zero, else SSMAP_THREADS, else hardware concurrency.
inline std::size_t worker_count(std::size_t requested = 0)
{
    std::size_t n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("SSMAP_THREADS")) {
            try {
                n = static_cast<std::size_t>(std::stoul(env));
            }
            catch (const std::exception&) {
                n = 0;
            }
        }
    }
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
    }
    return n;
}

/// Calls body(i) for i in [0, count). Each index is visited exactly once; the
/// first exception thrown by any worker is rethrown on the caller's thread.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body)
{
    threads = std::min(worker_count(threads), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                }
                catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace ssmap
