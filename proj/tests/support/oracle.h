#pragma once

// Brute-force reference for method-set comparison. It matches methods by
// structural signature equality and compares abstract token lists directly,
// so it shares neither the digest nor the sorted-merge path with the library.

#include <cstdint>
#include <vector>

#include "commonlibs/model.h"

namespace commonlibs::testing {

struct OracleCounts {
  std::uint64_t identical = 0;
  std::uint64_t similar = 0;
  std::uint64_t deleted = 0;
  std::uint64_t added = 0;
};

struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

inline bool same_signature(const MethodSignature& x, const MethodSignature& y) {
  return x.class_name == y.class_name && x.method_name == y.method_name &&
      x.return_type == y.return_type && x.param_types == y.param_types;
}

inline OracleCounts oracle_diff(const std::vector<MethodRecord>& a,
                                const std::vector<MethodRecord>& b) {
  OracleCounts c;
  for (const auto& ma : a) {
    const MethodRecord* match = nullptr;
    for (const auto& mb : b) {
      if (same_signature(ma.signature, mb.signature)) {
        match = &mb;
      }
    }
    if (match == nullptr) {
      ++c.deleted;
    } else if (match->abstract_body.tokens == ma.abstract_body.tokens) {
      ++c.identical;
    } else {
      ++c.similar;
    }
  }
  for (const auto& mb : b) {
    bool found = false;
    for (const auto& ma : a) {
      found = found || same_signature(ma.signature, mb.signature);
    }
    if (!found) {
      ++c.added;
    }
  }
  return c;
}

/// Exact max of the two ratios; a zero denominator yields 0/1. Requires a
/// non-empty comparison.
inline Fraction oracle_score(const OracleCounts& c) {
  const auto total = c.identical + c.similar + c.deleted + c.added;
  Fraction t1{c.identical, total - c.added};
  Fraction t2{c.identical, total - c.deleted};
  if (t1.den == 0) t1 = {0, 1};
  if (t2.den == 0) t2 = {0, 1};
  // t1 >= t2  <=>  t1.num * t2.den >= t2.num * t1.den
  return t1.num * t2.den >= t2.num * t1.den ? t1 : t2;
}

} // namespace commonlibs::testing
