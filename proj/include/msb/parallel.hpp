#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace msb {

// Runs fn(task_index) for every index in [0, n_tasks) on up to `jobs` threads.
// Tasks must write results into per-index slots so the outcome is independent
// of scheduling. The first exception thrown by any task is rethrown.
inline void parallel_for_tasks(std::size_t n_tasks, std::size_t jobs,
                               const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    const std::size_t n_threads = std::min(jobs, n_tasks);
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace msb
