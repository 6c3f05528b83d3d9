#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace algomarket {

inline unsigned default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Runs fn(worker, begin, end) over [0, count) split into `jobs` contiguous
// ranges: worker w owns [w*count/jobs, (w+1)*count/jobs). The partition is a
// pure function of (count, jobs), so results that merge worker outputs in
// worker order are reproducible.
template <typename Fn>
void parallel_ranges(uint64_t count, unsigned jobs, Fn&& fn) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || count < 2) {
        fn(0u, uint64_t{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < jobs; ++w) {
        const uint64_t lo = count / jobs * w + std::min<uint64_t>(w, count % jobs);
        const uint64_t hi = lo + count / jobs + (w < count % jobs ? 1 : 0);
        pool.emplace_back([w, lo, hi, &fn, &first_error, &error_mutex] {
            try {
                fn(w, lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace algomarket
