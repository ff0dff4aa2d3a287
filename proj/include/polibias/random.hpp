#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace polibias {

// Uniform draw in [0, n) by rejection. std::uniform_int_distribution is
// implementation-defined, so splits would not reproduce across standard
// libraries; this draw sequence is fixed by the mt19937_64 stream alone.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

// Fisher-Yates with the fixed draw above; std::shuffle has the same
// reproducibility problem as uniform_int_distribution.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace polibias
