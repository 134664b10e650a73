#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "commonlibs/harvest.h"
#include "commonlibs/model.h"

namespace commonlibs {

/// Dictionary words containing "ad" (which excuse an "ad" occurrence) and
/// terms that always mark an ad library. Allow terms win: they are removed
/// from the exclusion set.
class AdWordlist {
 public:
  AdWordlist(std::vector<std::string> exclusion_words,
             std::vector<std::string> allow_terms = default_allow_terms());

  /// One word per line; words are lowercased and those without "ad" are
  /// dropped.
  static AdWordlist from_text(std::string_view words,
                              std::string_view allow_terms = {});
  static std::vector<std::string> default_allow_terms();

  const std::set<std::string>& exclusion_words() const { return exclusion_; }
  const std::set<std::string>& allow_terms() const { return allow_; }

 private:
  std::set<std::string> exclusion_;
  std::set<std::string> allow_;
  std::size_t longest_ = 0;

  friend bool keyword_flag(const PackageId& pkg, const AdWordlist& wl);
};

/// A segment (lowercased) is flagged when one of its letter runs matches an
/// allow term, or when some "ad" occurrence is not inside an occurrence of an
/// exclusion word. Allow terms under four letters must equal the whole run
/// ("ads"); longer ones may appear anywhere in it ("advertisement").
bool keyword_flag(const PackageId& pkg, const AdWordlist& wl);

/// Method signatures in canonical form or class prefixes ending in '.'.
/// A prefix "java.net.URL." also matches the class java.net.URL itself.
class InternetApiList {
 public:
  InternetApiList();
  explicit InternetApiList(std::vector<std::string> entries);
  /// '#' comments and blank lines are skipped.
  static InternetApiList from_text(std::string_view text);

  bool matches(const MethodSignature& target) const;
  const std::vector<std::string>& entries() const { return entries_; }

 private:
  std::vector<std::string> entries_;
  std::set<std::string> signatures_;
  std::vector<std::string> prefixes_;
};

struct ViewRoots {
  std::set<std::string> exact{"android.view.View"};
  std::vector<std::string> prefixes{"android.widget."};

  bool matches(std::string_view class_name) const;
};

struct AdConfig {
  std::uint64_t sample_k = 10;
  std::uint64_t seed = 0;
  ViewRoots view_roots;
  int workers = 1;
};

/// Apps with at least one class in `pkg` (prefix semantics), sorted.
std::vector<const AppDescriptor*> apps_containing(const Corpus& corpus,
                                                  const PackageId& pkg);

/// False if no containing app holds INTERNET; otherwise checks a
/// deterministic sample of up to `sample_k` permitted apps for an invocation
/// of a listed API from inside `pkg`. Throws UnknownPackage.
bool uses_internet(const PackageId& pkg, const Corpus& corpus,
                   const InternetApiList& apis, std::uint64_t sample_k,
                   std::uint64_t seed = 0);

/// Throws UnknownPackage.
bool declares_component(const PackageId& pkg, const Corpus& corpus);

/// Some class in `pkg` has a superclass chain, resolved through the owning
/// app's class table, reaching a view root. Throws UnknownPackage.
bool declares_view(const PackageId& pkg, const Corpus& corpus,
                   const ViewRoots& roots = {});

struct AdEvidence {
  PackageId pkg;
  bool keyword_flag = false;
  bool uses_internet = false;
  bool has_component = false;
  bool has_view = false;
  bool is_ad = false;
};

struct CharacteristicCounts {
  std::uint64_t internet = 0;
  std::uint64_t view = 0;
  std::uint64_t component = 0;
  std::uint64_t internet_view = 0;
  std::uint64_t internet_component = 0;
  std::uint64_t view_component = 0;
  std::uint64_t all_three = 0;
  std::uint64_t keyword = 0;
  std::uint64_t ads = 0;
};

struct AdReport {
  std::vector<AdEvidence> evidence; // whitelist order
  CharacteristicCounts counts;

  std::vector<PackageId> ad_libraries() const;
};

AdReport detect_ad_libraries(const std::vector<PackageId>& whitelist,
                             const Corpus& corpus, const AdWordlist& wl,
                             const InternetApiList& apis,
                             const AdConfig& config = {});

/// package,keyword,internet,component,view,is_ad
std::string format_ad_csv(const AdReport& report);

} // namespace commonlibs
