#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "commonlibs/model.h"
#include "commonlibs/similarity.h"

namespace commonlibs {

struct CandidateStats {
  PackageId pkg;
  std::uint64_t n_shared_apps = 0;

  friend bool operator==(const CandidateStats&, const CandidateStats&) = default;
};

// Counts mirror the rows of the candidate-refinement funnel.
// final_candidates == above_min_apps - removed_one_segment
//                     - removed_obfuscated - removed_prefix
struct RefinementReport {
  std::uint64_t total_packages = 0;
  std::uint64_t distinct_packages = 0;
  std::uint64_t above_min_apps = 0;
  std::uint64_t removed_one_segment = 0;
  std::uint64_t removed_obfuscated = 0;
  std::uint64_t removed_prefix = 0;
  std::uint64_t final_candidates = 0;

  bool arithmetic_holds() const {
    return final_candidates + removed_one_segment + removed_obfuscated +
        removed_prefix == above_min_apps;
  }

  friend bool operator==(const RefinementReport&,
                         const RefinementReport&) = default;
};

struct HarvestConfig {
  double t_p = 0.9;
  double t_a = 0.1;
  std::uint64_t min_apps = 10;
  std::uint64_t pairs_per_candidate = 10;
  std::uint64_t seed = 0;
  SdkPrefixList sdk;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

using AppPair = std::pair<std::string, std::string>;

struct PairEvidence {
  AppPair apps;
  std::optional<double> pkg_sim; // nullopt: package empty on both sides
  double app_sim = 0.0;
};

struct LibraryVerdict {
  PackageId pkg;
  std::uint64_t n_shared_apps = 0;
  std::vector<PairEvidence> pairs;
  std::uint64_t pass_count = 0;
  std::uint64_t fail_count = 0;
  std::uint64_t undecidable_count = 0;
  bool is_library = false;

  std::optional<double> max_pkg_sim() const;
  std::optional<double> min_app_sim() const;
};

struct Whitelist {
  std::vector<PackageId> entries; // sorted, unique
  HarvestConfig provenance;
  std::vector<LibraryVerdict> verdicts; // one per tested candidate, by pkg

  bool contains(const PackageId& pkg) const;
};

std::vector<CandidateStats> extract_candidates(const Corpus& corpus);

/// Any segment of length one.
bool is_obfuscated(const PackageId& pkg);

std::pair<std::vector<CandidateStats>, RefinementReport> refine_candidates(
    const std::vector<CandidateStats>& candidates, const HarvestConfig& config);

/// Draws min(k, C(n,2)) distinct unordered pairs uniformly without
/// replacement. The generator is seeded with seed ^ digest(pkg), and the app
/// list is sorted first, so the draw depends on nothing else. Throws
/// NotEnoughApps when fewer than two apps are given.
std::vector<AppPair> sample_pairs(const PackageId& pkg,
                                  std::vector<std::string> containing_apps,
                                  std::uint64_t k, std::uint64_t seed);

/// Apps whose normalized package set contains `pkg`, sorted.
std::vector<std::string> apps_with_package(const Corpus& corpus,
                                           const PackageId& pkg);

/// Scores each pair once; the pass rule is applied separately so grids can
/// reuse the scores.
std::vector<PairEvidence> score_pairs(const PackageId& pkg,
                                      const std::vector<AppPair>& pairs,
                                      const Corpus& corpus);

/// pkg_sim >= t_p and app_sim <= t_a passes; a package empty on both sides is
/// undecidable. Library iff at least one pair passes.
LibraryVerdict apply_thresholds(const PackageId& pkg,
                                std::vector<PairEvidence> evidence,
                                double t_p, double t_a);

LibraryVerdict decide_library(const PackageId& pkg,
                              const std::vector<AppPair>& pairs,
                              const Corpus& corpus,
                              const HarvestConfig& config);

struct HarvestResult {
  Whitelist whitelist;
  RefinementReport report;
};

HarvestResult harvest_libraries(const Corpus& corpus,
                                const HarvestConfig& config, int workers = 1);

struct ThresholdGrid {
  std::vector<double> tp_values;
  std::vector<double> ta_values;
  // sizes[i][j] is |Whitelist(tp_values[i], ta_values[j])|
  std::vector<std::vector<std::uint64_t>> sizes;
  std::vector<std::vector<std::vector<PackageId>>> entries;
};

/// Samples and scores every candidate once, then evaluates each cell.
ThresholdGrid threshold_grid(const Corpus& corpus,
                             std::vector<double> tp_values,
                             std::vector<double> ta_values,
                             const HarvestConfig& config, int workers = 1);

// Output files.
std::string format_whitelist(const std::vector<PackageId>& entries);
/// package,n_shared_apps,pairs_tested,pairs_passed,max_pkg_sim,min_app_sim
std::string format_harvest_csv(const Whitelist& whitelist);
std::string format_grid_csv(const ThresholdGrid& grid);
/// One package per line; blank lines and '#' comments ignored.
std::vector<PackageId> parse_whitelist(std::string_view text);

} // namespace commonlibs
