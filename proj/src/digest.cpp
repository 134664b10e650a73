#include "commonlibs/digest.h"

namespace commonlibs {

std::uint64_t token_digest(std::span<const std::string> tokens) {
  std::uint64_t hash = kFnvOffsetBasis;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) {
      hash = fnv1a64("\x1f", hash);
    }
    hash = fnv1a64(tokens[i], hash);
  }
  return hash;
}

} // namespace commonlibs
