#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace clustval::detail {

/// Number of worker threads for `requested` (0 = hardware concurrency).
inline std::size_t resolve_threads(std::size_t requested) {
    if (requested) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls fn(block) for block in [0, n_blocks) across `threads` workers.
/// Block b is always processed by exactly one call, so results written per
/// block and reduced in block order are independent of the thread count.
template <typename Fn>
void for_each_block(std::size_t n_blocks, std::size_t threads, Fn&& fn) {
    threads = std::min(resolve_threads(threads), n_blocks);
    if (threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t b = t; b < n_blocks; b += threads) fn(b);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace clustval::detail
