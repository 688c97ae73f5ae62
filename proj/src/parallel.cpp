#include "rembed/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rembed {

namespace {

std::atomic<std::size_t> g_max_threads{0};

std::size_t resolved_threads() {
    const std::size_t n = g_max_threads.load(std::memory_order_relaxed);
    if (n != 0) return n;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace

void set_max_threads(std::size_t n) { g_max_threads.store(n, std::memory_order_relaxed); }

std::size_t max_threads() { return resolved_threads(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain) {
    if (n == 0) return;
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t workers = std::min(resolved_threads(), (n + grain - 1) / grain);
    if (workers <= 1) {
        body(0, n);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = n / workers;
    const std::size_t extra = n % workers;
    auto run = [&](std::size_t begin, std::size_t end) {
        try {
            body(begin, end);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    std::size_t begin = 0;
    std::size_t first_end = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t end = begin + chunk + (w < extra ? 1 : 0);
        if (w == 0)
            first_end = end;
        else
            pool.emplace_back(run, begin, end);
        begin = end;
    }
    run(0, first_end);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rembed
