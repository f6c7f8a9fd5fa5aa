#pragma once

// Fixed-chunk parallel map. Items are split into chunks whose boundaries
// depend only on the item count and chunk size; results come back in chunk
// order, so any reduction over them is independent of the worker count.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wb {

int default_workers();

template <class Fn>
auto parallel_chunks(long n_items, long chunk, int workers, Fn fn) -> std::vector<decltype(fn(0L, 0L))> {
    using T = decltype(fn(0L, 0L));
    const long n_chunks = n_items > 0 ? (n_items + chunk - 1) / chunk : 0;
    std::vector<T> out(n_chunks);
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (;;) {
            long c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                out[c] = fn(c * chunk, std::min(n_items, (c + 1) * chunk));
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next = n_chunks;
            }
        }
    };
    workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<long>(n_chunks, 1))));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace wb
