#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace crowdstrata {

// Seeded generator used by every randomized operation.
//
// Algorithm (version 1): std::mt19937_64 seeded with the 64-bit seed directly.
// Bounded integers use masked rejection sampling on the raw 64-bit output,
// uniform reals take the top 53 bits, and normals use the Box-Muller transform.
// None of this goes through std::*_distribution, whose output is
// implementation-defined, so plans and splits are identical across platforms.
class Rng {
public:
    static constexpr int kVersion = 1;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Uniform real in [0, 1).
    double uniform01();

    /// Standard normal variate.
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; derives independent sub-seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace crowdstrata
