#include "sampling.h"

#include <random>
#include <set>

namespace commonlibs::detail {

namespace {

// Unbiased draw from [0, bound) by rejection. std::uniform_int_distribution
// is implementation-defined, which would make samples differ across
// standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) {
      return r % bound;
    }
  }
}

} // namespace

std::vector<std::uint64_t> sample_indices(std::uint64_t n, std::uint64_t k,
                                          std::uint64_t seed) {
  std::vector<std::uint64_t> out;
  if (n <= k) {
    out.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      out[i] = i;
    }
    return out;
  }
  // Floyd's algorithm: every k-subset equally likely, k draws.
  std::mt19937_64 rng(seed);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = n - k; j < n; ++j) {
    const auto t = uniform_below(rng, j + 1);
    chosen.insert(chosen.count(t) ? j : t);
  }
  out.assign(chosen.begin(), chosen.end());
  return out;
}

} // namespace commonlibs::detail
