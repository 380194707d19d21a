#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace crnfit {

// Uniform in [0, 1) with 53 random bits. Distribution helpers are hand-rolled
// on top of the standardised mt19937_64 stream so results are identical
// across standard libraries.
inline double rng01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Unbiased uniform integer in [0, n).
inline std::uint64_t rng_below(std::mt19937_64& g, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(g()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        std::uint64_t t = (0 - n) % n;
        while (lo < t) {
            m = static_cast<unsigned __int128>(g()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

inline double exponential_sample(std::mt19937_64& g, double rate) {
    return -std::log1p(-rng01(g)) / rate;
}

// Fisher-Yates.
template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng_below(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace crnfit
