#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace felp {

/// Uniform draw in [0, bound). Rejection sampling on raw mt19937_64 output keeps the
/// sequence identical across standard library implementations.
inline std::size_t uniform_below(std::mt19937_64& rng, std::size_t bound) {
    constexpr std::uint64_t top = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t range = bound;
    const std::uint64_t limit = top - top % range;
    std::uint64_t r = 0;
    do {
        r = rng();
    } while (r >= limit);
    return static_cast<std::size_t>(r % range);
}

/// Fisher-Yates.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[uniform_below(rng, i)]);
}

} // namespace felp
