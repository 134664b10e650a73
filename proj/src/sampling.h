#pragma once

#include <cstdint>
#include <vector>

namespace commonlibs::detail {

/// min(k, n) distinct indices from [0, n), ascending. All of [0, n) when
/// n <= k; otherwise a uniform subset drawn with mt19937_64(seed).
std::vector<std::uint64_t> sample_indices(std::uint64_t n, std::uint64_t k,
                                          std::uint64_t seed);

} // namespace commonlibs::detail
