#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "commonlibs/model.h"

namespace commonlibs {

/// Class-name prefixes (ending in '.') or exact class names whose methods are
/// framework API. Invocations of these keep their target in the abstract
/// body since obfuscators cannot rename them.
class SdkPrefixList {
 public:
  /// android., java., javax., org.json., org.w3c., org.xml.,
  /// org.apache.http., dalvik.
  SdkPrefixList();
  explicit SdkPrefixList(std::vector<std::string> entries);

  bool matches(std::string_view class_name) const;
  const std::vector<std::string>& entries() const { return entries_; }

  friend bool operator==(const SdkPrefixList&, const SdkPrefixList&) = default;

 private:
  std::vector<std::string> entries_;
};

/// Opcode per instruction; SDK invocations become "opcode:<target>".
AbstractBody abstract_method(std::span<const Instruction> raw_body,
                             const SdkPrefixList& sdk);

struct DiffCounts {
  std::uint64_t identical = 0;
  std::uint64_t similar = 0;
  std::uint64_t deleted = 0;
  std::uint64_t added = 0; // "new": only on side B

  std::uint64_t total() const { return identical + similar + deleted + added; }

  friend bool operator==(const DiffCounts&, const DiffCounts&) = default;
};

struct SimilarityScore {
  double value = 0.0;
};

using MethodSet = std::vector<const MethodRecord*>;

// Sorted (signature, digest) pairs. Building these once per method set makes
// repeated comparisons a linear merge.
struct MethodFingerprint {
  std::string signature;
  std::uint64_t digest = 0;
};
using Fingerprints = std::vector<MethodFingerprint>;

/// Throws DuplicateSignature when two methods share a signature.
Fingerprints fingerprint(std::span<const MethodRecord* const> methods);
DiffCounts diff_fingerprints(const Fingerprints& a, const Fingerprints& b);

DiffCounts diff_method_sets(std::span<const MethodRecord* const> a,
                            std::span<const MethodRecord* const> b);

/// max(identical / (total - new), identical / (total - deleted)); a term
/// whose denominator is zero counts as 0. Throws EmptyComparison when
/// total == 0.
SimilarityScore similarity_score(const DiffCounts& d);

MethodSet all_methods(const AppDescriptor& app);
MethodSet methods_of_package(const AppDescriptor& app, const PackageId& pkg);

SimilarityScore package_similarity(const AppDescriptor& app1,
                                   const AppDescriptor& app2,
                                   const PackageId& pkg);
SimilarityScore app_similarity(const AppDescriptor& app1,
                               const AppDescriptor& app2);

} // namespace commonlibs
