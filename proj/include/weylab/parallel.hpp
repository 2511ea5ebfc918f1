#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace weylab {

/// Runs fn(i) for i in [0, count). With workers <= 1 the loop is sequential and
/// in index order; otherwise indices are split into contiguous chunks.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    const std::size_t chunk = (count + w - 1) / w;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            try {
                const std::size_t lo = t * chunk;
                const std::size_t hi = std::min(count, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace weylab
