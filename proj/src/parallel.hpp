#pragma once

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace nvm {

// Worker count: THREADS env var if set, else hardware concurrency. Thread
// count never changes numeric results; replica streams are keyed by replica
// index and partial tallies are integers merged in chunk order.
inline int thread_count() {
    if (const char* env = std::getenv("THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Run fn(replica_index, counters) for every replica in [0, total) and return
// the per-counter sums. fn must derive all randomness from the replica index.
template <class Fn>
std::vector<int64_t> parallel_tally(int64_t total, size_t n_counters, Fn fn) {
    const int threads = std::min<int64_t>(thread_count(), std::max<int64_t>(total, 1));
    std::vector<std::vector<int64_t>> partial(threads, std::vector<int64_t>(n_counters, 0));
    if (threads == 1) {
        for (int64_t r = 0; r < total; ++r) fn(r, partial[0].data());
    } else {
        std::vector<std::thread> pool;
        const int64_t chunk = (total + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int64_t lo = t * chunk;
            const int64_t hi = std::min(total, lo + chunk);
            pool.emplace_back([&, t, lo, hi] {
                for (int64_t r = lo; r < hi; ++r) fn(r, partial[t].data());
            });
        }
        for (auto& th : pool) th.join();
    }
    std::vector<int64_t> out(n_counters, 0);
    for (const auto& p : partial)
        for (size_t i = 0; i < n_counters; ++i) out[i] += p[i];
    return out;
}

}  // namespace nvm
