#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ovox {

/// Worker count from OVX_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_count() {
    unsigned n = 0;
    if (const char* env = std::getenv("OVX_THREADS")) {
        try {
            n = static_cast<unsigned>(std::stoul(env));
        } catch (...) {
            n = 0;
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs body(begin, end) over contiguous chunks of [0, count).
/// Chunk boundaries depend only on count and grain, never on the thread
/// count, so any per-chunk output concatenated in chunk order is identical
/// for every worker count.
template <typename Body>
void parallel_chunks(std::size_t count, std::size_t grain, Body&& body, unsigned threads = 0) {
    if (count == 0) return;
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t chunks = (count + grain - 1) / grain;
    if (threads == 0) threads = thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
    if (threads <= 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            body(c * grain, std::min(count, (c + 1) * grain));
        return;
    }
    std::size_t next = 0;
    std::mutex m;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            std::size_t c;
            {
                std::lock_guard lock(m);
                if (next >= chunks || error) return;
                c = next++;
            }
            try {
                body(c * grain, std::min(count, (c + 1) * grain));
            } catch (...) {
                std::lock_guard lock(m);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Index of the chunk containing item i under parallel_chunks' partitioning.
inline std::size_t chunk_of(std::size_t i, std::size_t grain) { return i / std::max<std::size_t>(grain, 1); }

template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t grain = 1024, unsigned threads = 0) {
    parallel_chunks(
        count, grain,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) body(i);
        },
        threads);
}

}  // namespace ovox
