#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace laysum::detail {

// Calls fn(i) for i in [0, n) on up to `jobs` threads. Work items must write
// only to their own slot. If any call throws, the exception from the lowest
// index is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto body = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) body(i);
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace laysum::detail
