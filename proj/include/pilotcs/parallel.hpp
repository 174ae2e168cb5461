// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Minimal work-sharing loop over std::thread.

#ifndef PILOTCS_PARALLEL_HPP
#define PILOTCS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pilotcs
{

/// Runs fn(i) for i in [0, n) on up to `threads` workers and rethrows the
/// first failure. Work items must write to disjoint outputs.
inline void parallel_for(int n, int threads, const std::function<void(int)> &fn)
{
    const int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure)
                        failure = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace pilotcs

#endif
