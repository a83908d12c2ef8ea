#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace tsr {

/// Worker-lane count: an explicit request wins, then TSR_THREADS, then the
/// hardware concurrency. 0 means "auto" at every level.
inline std::size_t resolve_lanes(std::size_t requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TSR_THREADS"); env != nullptr && *env != '\0') {
        try {
            const long n = std::stol(env);
            if (n > 0) return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
            // fall through to auto
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls fn(i) for every i in [0, n), spread over `lanes` threads with a
/// static interleaved assignment. Callers write results by index, so the
/// outcome does not depend on the lane count. The first exception thrown
/// by any lane is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t lanes, Fn&& fn) {
    if (lanes <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    lanes = std::min(lanes, n);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run_lane = [&](std::size_t lane) {
        try {
            for (std::size_t i = lane; i < n; i += lanes) fn(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    std::vector<std::jthread> workers;
    workers.reserve(lanes - 1);
    for (std::size_t lane = 1; lane < lanes; ++lane) workers.emplace_back(run_lane, lane);
    run_lane(0);
    workers.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace tsr
