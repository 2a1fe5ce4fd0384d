#pragma once

#include <cstdint>

#include "msalab/geometry.hpp"

namespace msalab {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based per-site word: a pure function of (master_seed, trial, site).
/// Re-querying any coordinate reproduces the same word, so overlapping regions
/// and independently generated boxes agree automatically.
inline std::uint64_t site_word(std::uint64_t master_seed, std::int64_t trial, const Site& s, int dim) {
    std::uint64_t h = splitmix64(master_seed ^ 0x243f6a8885a308d3ULL);
    h = splitmix64(h ^ static_cast<std::uint64_t>(trial));
    for (int i = 0; i < dim; ++i) h = splitmix64(h ^ static_cast<std::uint64_t>(s[i]));
    return splitmix64(h ^ static_cast<std::uint64_t>(dim));
}

inline double word_to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53; // [0,1)
}

/// Independent uniform [0,1) stream for non-site uses (transfer matrices etc).
inline double stream_uniform(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = splitmix64(master_seed ^ 0x452821e638d01377ULL);
    h = splitmix64(h ^ stream);
    return word_to_unit(splitmix64(h ^ counter));
}

} // namespace msalab
