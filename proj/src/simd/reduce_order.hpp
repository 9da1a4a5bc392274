#pragma once

#include <cstddef>

// Shared description of the summation order used by both kernel backends:
// four interleaved lanes, each summed pairwise over blocks of at most eight
// vectors, then combined as (l0 + l1) + (l2 + l3), then the scalar tail.

namespace hyploop::simd::detail {

inline constexpr std::size_t kLanes = 4;
inline constexpr std::size_t kLeafVectors = 8;

}  // namespace hyploop::simd::detail
