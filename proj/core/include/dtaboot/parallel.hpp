// Minimal index-space parallel map. Work items must be independent; results
// land in caller-provided storage by index, so output never depends on the
// thread count or completion order.
#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace dtaboot {

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, count). `threads <= 1` executes inline. The
// first exception thrown by any worker is rethrown after all workers join.
inline void parallel_for_index(std::int64_t count, int threads,
                               const std::function<void(std::int64_t)>& body) {
    if (count <= 0) return;
    const int n_threads = std::min<std::int64_t>(resolve_thread_count(threads), count);
    if (n_threads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
    workers.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::int64_t i = t; i < count; i += n_threads) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace dtaboot
