#pragma once

#include <cstdint>
#include <random>

#include "trs/shape.hpp"

namespace trs::rng {

/// splitmix64 step; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic substream seed from a master seed and up to three tags.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

/// Substream tags. Solvers derive core initialization identically so runs
/// with the same seed start from the same iterate regardless of solver.
enum Tag : std::uint64_t {
    tag_init = 1,
    tag_sampler = 2,
    tag_signflip = 3,
    tag_hash = 4,
    tag_noise = 5,
    tag_gen = 6,
    tag_trial = 7,
};

/// Seeded generator wrapper; all randomness flows through explicit instances.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double normal() { return normal_(eng_); }
    double uniform() { return unif_(eng_); }

    /// Uniform integer in [lo, hi], inclusive.
    Index uniform_int(Index lo, Index hi) {
        return std::uniform_int_distribution<Index>(lo, hi)(eng_);
    }

    std::uint64_t uniform_u64(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(eng_);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace trs::rng
