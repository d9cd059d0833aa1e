#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dragan {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Seeded generator that is passed explicitly to every stochastic operation.
///
/// `split(key)` derives an independent child stream from the seed and a key
/// without consuming state from the parent, so sub-tasks keyed by
/// (dataset, method, repeat, fold) draw the same numbers regardless of the
/// order in which they run.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(detail::splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    Rng split(std::uint64_t key) const { return Rng(detail::splitmix64(seed_ ^ detail::splitmix64(key + 1))); }
    Rng split(std::string_view key) const { return split(detail::fnv1a(key)); }

    /// Uniform on [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Beta(a, b) through the ratio of two gamma draws. Shapes below one can
    /// underflow both draws to zero; those pairs are redrawn.
    double beta(double a, double b) {
        for (;;) {
            double x = std::gamma_distribution<double>(a, 1.0)(engine_);
            double y = std::gamma_distribution<double>(b, 1.0)(engine_);
            if (x + y > 0.0) return x / (x + y);
        }
    }

    template <class It>
    void shuffle(It first, It last) {
        // Fisher-Yates on our own index draws; std::shuffle's sequence is
        // implementation-defined.
        auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = index(i);
            std::iter_swap(first + (i - 1), first + j);
        }
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace dragan
