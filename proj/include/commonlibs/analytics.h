#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "commonlibs/harvest.h"
#include "commonlibs/model.h"

namespace commonlibs {

/// Copy of `app` without the classes that belong to any whitelist package.
AppDescriptor strip_whitelist(const AppDescriptor& app,
                              const std::vector<PackageId>& whitelist);

enum class PairLabel { Piggybacked, Distinct };
std::string_view to_string(PairLabel label);

struct PairReport {
  std::string app_a;
  std::string app_b;
  double sim_full = 0.0;
  std::optional<double> sim_excluding; // nullopt: nothing left after stripping
  PairLabel label_full = PairLabel::Distinct;
  std::optional<PairLabel> label_excluding;
};

/// `app_a,app_b` with a header row.
std::vector<AppPair> parse_pairs_csv(std::string_view text);

/// Labels use sim >= threshold as piggybacked. Throws UnknownApp.
std::vector<PairReport> pairwise_piggyback(
    const std::vector<AppPair>& pairs, const Corpus& corpus,
    const std::vector<PackageId>& whitelist, double threshold = 0.8,
    int workers = 1);

/// app_a,app_b,sim_full,sim_excluding,label_full,label_excluding
std::string format_pairs_csv(const std::vector<PairReport>& reports);

/// Whitelist packages by the number of apps with a class in them,
/// descending, ties by name. Zero counts are kept.
std::vector<std::pair<PackageId, std::uint64_t>> popularity(
    const Corpus& corpus, const std::vector<PackageId>& whitelist,
    std::size_t top_n);

struct ProportionRow {
  std::string app_id;
  std::uint64_t size_lib = 0;
  std::uint64_t size_app = 0;
  double p = 0.0;
};

struct ProportionReport {
  std::vector<ProportionRow> rows; // corpus order
  double median = 0.0;
  double fraction_at_least_half = 0.0;
};

/// Throws EmptyApp for an app of size zero.
ProportionReport library_code_proportion(
    const Corpus& corpus, const std::vector<PackageId>& whitelist);

struct FeatureMatrix {
  std::vector<std::string> rows;
  std::vector<PackageId> columns;
  std::vector<std::vector<std::uint8_t>> cells;
  std::optional<std::vector<std::string>> labels; // empty string: unlabeled
};

/// `app_id,label` with a header row.
std::map<std::string, std::string> parse_labels_csv(std::string_view text);

/// Columns are the whitelist packages used by at least one app. Throws
/// UnknownApp when a label names an app outside the corpus.
FeatureMatrix export_features(
    const Corpus& corpus, const std::vector<PackageId>& whitelist,
    const std::optional<std::map<std::string, std::string>>& labels =
        std::nullopt);

std::string format_features_csv(const FeatureMatrix& matrix);
std::string format_popularity_csv(
    const std::vector<std::pair<PackageId, std::uint64_t>>& ranking);
std::string format_proportion_csv(const ProportionReport& report);

} // namespace commonlibs
