#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace bootperc {

/// SplitMix64 finalizer. Used to derive independent seeds for replicate streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under master seed `seed`. Counter-based: the mapping
/// replicate index -> stream is a pure function and independent of scheduling.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Thin wrapper around mt19937_64 with the few draws the library needs.
/// Uniform doubles are built from the top 53 bits so results do not depend on
/// the standard library's generate_canonical.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

    static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(stream_seed(seed, index)); }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Lemire's nearly-divisionless method
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Number of failures before the first success of a Bernoulli(q) sequence.
    /// Returns max() of uint64 for q == 0.
    std::uint64_t geometric_skip(double q) {
        if (q >= 1.0) return 0;
        if (q <= 0.0) return std::numeric_limits<std::uint64_t>::max();
        const double k = std::floor(std::log(uniform_pos()) / std::log1p(-q));
        if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
        return static_cast<std::uint64_t>(k);
    }

    std::uint64_t binomial(std::uint64_t trials, double q) {
        if (trials == 0 || q <= 0.0) return 0;
        if (q >= 1.0) return trials;
        std::binomial_distribution<std::uint64_t> dist(trials, q);
        return dist(engine_);
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace bootperc
