#pragma once

// Reproducible random streams.
//
// Every consumer draws from its own std::mt19937_64 whose seed is
// splitmix64(master ^ splitmix64(stream tag)). Adding a new stream never
// perturbs the existing ones. Distributions are implemented here rather than
// with <random> distributions, whose output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace sic {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a over the tag so streams can be named.
inline std::uint64_t stream_tag(std::string_view tag) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept {
    return splitmix64(master ^ splitmix64(stream_tag(tag)));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master, std::string_view tag) : engine_(derive_seed(master, tag)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), unbiased by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    /// Standard normal via Box-Muller; one draw per call, no cached spare.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace sic
