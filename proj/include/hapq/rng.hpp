#ifndef HAPQ_RNG_HPP
#define HAPQ_RNG_HPP

// Counter-keyed random streams. Trials are grouped into fixed-size chunks and
// every chunk owns an engine seeded from (seed, stream, chunk), so the draws a
// trial sees do not depend on how chunks are spread over worker threads.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace hapq {

inline constexpr std::uint64_t chunk_size = 4096;

class chunk_rng {
public:
    chunk_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
        engine_.seed(seq);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Count successes of `trial` over n trials. `trial(rng)` draws what it needs
/// from the chunk engine and returns whether the trial succeeded.
template <class Trial>
std::uint64_t count_successes(std::uint64_t n, std::uint64_t seed, std::uint64_t stream, unsigned workers,
                              const Trial& trial) {
    const std::uint64_t chunks = (n + chunk_size - 1) / chunk_size;
    std::vector<std::uint64_t> per_chunk(chunks, 0);
    auto run_chunk = [&](std::uint64_t c) {
        chunk_rng rng(seed, stream, c);
        const std::uint64_t begin = c * chunk_size;
        const std::uint64_t end = std::min(n, begin + chunk_size);
        std::uint64_t hits = 0;
        for (std::uint64_t i = begin; i < end; ++i) hits += trial(rng) ? 1 : 0;
        per_chunk[c] = hits;
    };
    const unsigned w = static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(chunks, 1)));
    if (w <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (unsigned t = 0; t < w; ++t) {
            pool.emplace_back([&] {
                for (std::uint64_t c = next++; c < chunks; c = next++) run_chunk(c);
            });
        }
        for (auto& th : pool) th.join();
    }
    std::uint64_t total = 0;
    for (auto h : per_chunk) total += h;
    return total;
}

}  // namespace hapq

#endif  // HAPQ_RNG_HPP
