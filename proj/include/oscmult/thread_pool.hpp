#pragma once

#include <atomic>
#include <mutex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace oscmult {

/// Index-parallel map over [0, count). Results are written into caller-owned
/// slots by index, so assembly order never depends on scheduling. threads == 0
/// picks the hardware count.
class WorkerPool {
public:
    explicit WorkerPool(unsigned threads = 0)
        : threads_(threads ? threads : std::max(1u, std::thread::hardware_concurrency())) {}

    unsigned thread_count() const { return threads_; }

    void map_indexed(std::size_t count, const std::function<void(std::size_t)>& fn) const {
        if (count == 0) return;
        const unsigned workers = std::min<std::size_t>(threads_, count);
        if (workers <= 1) {
            for (std::size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> crew;
        crew.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            crew.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : crew) t.join();
        if (error) std::rethrow_exception(error);
    }

private:
    unsigned threads_;
};

} // namespace oscmult
