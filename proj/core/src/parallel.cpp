#include "evostab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

namespace evostab {

unsigned thread_count() {
    if (const char* env = std::getenv("EVOSTAB_THREADS")) {
        unsigned n = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
        if (ec == std::errc() && n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(thread_count(), n));
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex error_mutex;
    auto run = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (i < first_index) {
                first_index = i;
                first_error = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) run(i);
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace evostab
