// parallel.hpp — index-space parallel_for with deterministic output placement

#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace ionlrb {

// Process-wide worker count for field sweeps. 1 = serial.
int thread_count();
void set_thread_count(int n);

// Calls fn(i) for i in [begin, end). Workers own disjoint index ranges, so
// writes into preallocated buffers indexed by i are race-free and the result
// is independent of scheduling.
template <typename Fn>
void parallel_for(long begin, long end, Fn&& fn) {
    const long n = end - begin;
    const int workers = std::min<long>(thread_count(), std::max<long>(1, n));
    if (workers <= 1 || n <= 1) {
        for (long i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long lo = begin + w * chunk;
        const long hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ionlrb
