#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace bcp {

// mt19937_64's output sequence is fixed by the standard; the helpers below
// avoid std distributions so results are identical across standard libraries.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

template <class T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace bcp
