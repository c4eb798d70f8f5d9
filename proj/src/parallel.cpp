#include "evdfa/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace evdfa::detail {

unsigned thread_budget() {
    if (const char* env = std::getenv("EVDFA_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
        // 0 or malformed falls through to auto
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_chunks(std::size_t count, std::size_t min_chunk,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    min_chunk = std::max<std::size_t>(min_chunk, 1);

    const std::size_t budget = thread_budget();
    const std::size_t max_chunks = (count + min_chunk - 1) / min_chunk;
    const std::size_t workers = std::min<std::size_t>(budget, max_chunks);
    if (workers <= 1) {
        fn(0, count);
        return;
    }

    const std::size_t chunk = (count + workers - 1) / workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&](std::size_t begin, std::size_t end) {
        try {
            fn(begin, end);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(run, begin, end);
    }
    run(0, std::min(count, chunk));
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace evdfa::detail
