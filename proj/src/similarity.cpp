#include "commonlibs/similarity.h"

#include <algorithm>

#include "commonlibs/errors.h"

namespace commonlibs {

SdkPrefixList::SdkPrefixList()
    : entries_{"android.",  "java.",    "javax.",           "org.json.",
               "org.w3c.",  "org.xml.", "org.apache.http.", "dalvik."} {}

SdkPrefixList::SdkPrefixList(std::vector<std::string> entries)
    : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.empty() || e.front() == '.') {
      throw ConfigError("invalid SDK prefix '" + e + "'");
    }
  }
}

bool SdkPrefixList::matches(std::string_view class_name) const {
  for (const auto& e : entries_) {
    if (e.back() == '.' ? class_name.starts_with(e) : class_name == e) {
      return true;
    }
  }
  return false;
}

AbstractBody abstract_method(std::span<const Instruction> raw_body,
                             const SdkPrefixList& sdk) {
  std::vector<std::string> tokens;
  tokens.reserve(raw_body.size());
  for (const auto& insn : raw_body) {
    if (insn.target && insn.opcode.starts_with("invoke") &&
        sdk.matches(insn.target->class_name)) {
      tokens.push_back(insn.opcode + ":" + insn.target->canonical());
    } else {
      tokens.push_back(insn.opcode);
    }
  }
  return AbstractBody::from_tokens(std::move(tokens));
}

Fingerprints fingerprint(std::span<const MethodRecord* const> methods) {
  Fingerprints out;
  out.reserve(methods.size());
  for (const auto* m : methods) {
    out.push_back({m->signature.canonical(), m->abstract_body.digest});
  }
  std::sort(out.begin(), out.end(),
            [](const MethodFingerprint& x, const MethodFingerprint& y) {
              return x.signature < y.signature;
            });
  auto dup = std::adjacent_find(
      out.begin(), out.end(),
      [](const MethodFingerprint& x, const MethodFingerprint& y) {
        return x.signature == y.signature;
      });
  if (dup != out.end()) {
    throw DuplicateSignature(dup->signature);
  }
  return out;
}

DiffCounts diff_fingerprints(const Fingerprints& a, const Fingerprints& b) {
  DiffCounts d;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    int cmp = a[i].signature.compare(b[j].signature);
    if (cmp < 0) {
      ++d.deleted;
      ++i;
    } else if (cmp > 0) {
      ++d.added;
      ++j;
    } else {
      if (a[i].digest == b[j].digest) {
        ++d.identical;
      } else {
        ++d.similar;
      }
      ++i;
      ++j;
    }
  }
  d.deleted += a.size() - i;
  d.added += b.size() - j;
  return d;
}

DiffCounts diff_method_sets(std::span<const MethodRecord* const> a,
                            std::span<const MethodRecord* const> b) {
  return diff_fingerprints(fingerprint(a), fingerprint(b));
}

SimilarityScore similarity_score(const DiffCounts& d) {
  const auto total = d.total();
  if (total == 0) {
    throw EmptyComparison();
  }
  auto term = [&](std::uint64_t denominator) {
    return denominator == 0 ? 0.0
                            : static_cast<double>(d.identical) /
            static_cast<double>(denominator);
  };
  return {std::max(term(total - d.added), term(total - d.deleted))};
}

MethodSet all_methods(const AppDescriptor& app) {
  MethodSet out;
  for (const auto& c : app.classes) {
    for (const auto& m : c.methods) {
      out.push_back(&m);
    }
  }
  return out;
}

MethodSet methods_of_package(const AppDescriptor& app, const PackageId& pkg) {
  MethodSet out;
  for (const auto& c : app.classes) {
    if (!class_in_package(c.name, pkg)) {
      continue;
    }
    for (const auto& m : c.methods) {
      out.push_back(&m);
    }
  }
  return out;
}

SimilarityScore package_similarity(const AppDescriptor& app1,
                                   const AppDescriptor& app2,
                                   const PackageId& pkg) {
  return similarity_score(diff_method_sets(methods_of_package(app1, pkg),
                                           methods_of_package(app2, pkg)));
}

SimilarityScore app_similarity(const AppDescriptor& app1,
                               const AppDescriptor& app2) {
  return similarity_score(
      diff_method_sets(all_methods(app1), all_methods(app2)));
}

} // namespace commonlibs
