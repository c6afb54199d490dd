#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "rectdim/errors.hpp"
#include "rectdim/random.hpp"

namespace rectdim {

template <class Result>
struct SampleBatch {
    std::vector<Result> results;       // ordered by sample index
    std::vector<std::uint64_t> seeds;  // seed that produced each result
    std::size_t discards = 0;          // draws rejected for horizon overflow
};

/// Runs `fn(seed)` for samples 0..count-1. A draw that raises HorizonOverflow
/// is discarded and redrawn from derive_seed(base, i, attempt + 1). Results
/// depend only on (base, i), never on `workers` or scheduling.
template <class Result, class Fn>
SampleBatch<Result> run_samples(std::size_t count, std::uint64_t base, unsigned workers, Fn&& fn,
                                std::size_t max_attempts = 256) {
    std::vector<std::optional<Result>> slots(count);
    std::vector<std::uint64_t> seeds(count, 0);
    std::vector<std::size_t> discards(count, 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                for (std::size_t attempt = 0;; ++attempt) {
                    if (attempt == max_attempts) {
                        throw HorizonOverflow("too many horizon overflows; increase the odometer depth");
                    }
                    const std::uint64_t seed = derive_seed(base, i, attempt);
                    try {
                        slots[i].emplace(fn(seed));
                        seeds[i] = seed;
                        break;
                    } catch (const HorizonOverflow&) {
                        ++discards[i];
                    }
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    const unsigned n_threads = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    SampleBatch<Result> batch;
    batch.results.reserve(count);
    for (auto& s : slots) batch.results.push_back(std::move(*s));
    batch.seeds = std::move(seeds);
    for (auto d : discards) batch.discards += d;
    return batch;
}

}  // namespace rectdim
