#include "commonlibs/harvest.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "commonlibs/digest.h"
#include "commonlibs/errors.h"
#include "commonlibs/parallel.h"
#include "sampling.h"

namespace commonlibs {

namespace {

using PackageIndex = std::map<PackageId, std::vector<std::string>>;

// Apps are visited in app_id order, so every list is already sorted.
PackageIndex build_package_index(const Corpus& corpus) {
  PackageIndex index;
  for (const auto& app : corpus.apps()) {
    for (const auto& pkg : app.packages()) {
      index[pkg].push_back(app.app_id);
    }
  }
  return index;
}

// Maps a rank in [0, n*(n-1)/2) onto the pair (i, j), i < j, in
// lexicographic order.
std::pair<std::size_t, std::size_t> unrank_pair(std::uint64_t rank,
                                                std::size_t n) {
  std::size_t i = 0;
  while (rank >= n - 1 - i) {
    rank -= n - 1 - i;
    ++i;
  }
  return {i, i + 1 + static_cast<std::size_t>(rank)};
}

std::string_view class_of_signature(std::string_view signature) {
  return signature.substr(0, signature.find(": "));
}

// Per-app fingerprints, computed once and shared by every pair comparison.
class ScoringContext {
 public:
  ScoringContext(const Corpus& corpus, int workers) {
    prints_.resize(corpus.size());
    parallel_for(corpus.size(), workers, [&](std::size_t i) {
      prints_[i] = fingerprint(all_methods(corpus.apps()[i]));
    });
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      slot_.emplace(corpus.apps()[i].app_id, i);
    }
  }

  std::vector<PairEvidence> score(const PackageId& pkg,
                                  const std::vector<AppPair>& pairs) const {
    std::vector<PairEvidence> out;
    out.reserve(pairs.size());
    for (const auto& pair : pairs) {
      const auto& a = prints_for(pair.first);
      const auto& b = prints_for(pair.second);
      PairEvidence ev;
      ev.apps = pair;
      const auto pkg_diff = diff_fingerprints(restrict(a, pkg), restrict(b, pkg));
      if (pkg_diff.total() > 0) {
        ev.pkg_sim = similarity_score(pkg_diff).value;
      }
      const auto app_diff = diff_fingerprints(a, b);
      ev.app_sim = app_diff.total() > 0 ? similarity_score(app_diff).value : 0.0;
      out.push_back(std::move(ev));
    }
    return out;
  }

 private:
  const Fingerprints& prints_for(const std::string& app_id) const {
    auto it = slot_.find(app_id);
    if (it == slot_.end()) {
      throw UnknownApp(app_id);
    }
    return prints_[it->second];
  }

  static Fingerprints restrict(const Fingerprints& all, const PackageId& pkg) {
    Fingerprints out;
    for (const auto& fp : all) {
      if (class_in_package(class_of_signature(fp.signature), pkg)) {
        out.push_back(fp);
      }
    }
    return out;
  }

  std::vector<Fingerprints> prints_;
  std::map<std::string, std::size_t, std::less<>> slot_;
};

struct ScoredCandidate {
  PackageId pkg;
  std::uint64_t n_shared_apps = 0;
  std::vector<PairEvidence> evidence;
};

struct Pipeline {
  std::vector<ScoredCandidate> scored;
  RefinementReport report;
};

Pipeline run_pipeline(const Corpus& corpus, const HarvestConfig& config,
                      int workers) {
  config.validate();
  const auto index = build_package_index(corpus);
  auto [survivors, report] =
      refine_candidates(extract_candidates(corpus), config);

  Pipeline pipeline;
  pipeline.report = report;
  pipeline.scored.resize(survivors.size());
  if (survivors.empty()) {
    return pipeline;
  }
  const ScoringContext context(corpus, workers);
  parallel_for(survivors.size(), workers, [&](std::size_t i) {
    const auto& cand = survivors[i];
    const auto& apps = index.at(cand.pkg);
    auto pairs = sample_pairs(cand.pkg, apps, config.pairs_per_candidate,
                              config.seed);
    pipeline.scored[i] = {cand.pkg, cand.n_shared_apps,
                          context.score(cand.pkg, pairs)};
  });
  std::sort(pipeline.scored.begin(), pipeline.scored.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              return a.pkg < b.pkg;
            });
  return pipeline;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

} // namespace

void HarvestConfig::validate() const {
  if (!(t_p > 0.0 && t_p <= 1.0)) {
    throw ConfigError("t_p must be in (0, 1]");
  }
  if (!(t_a >= 0.0 && t_a < 1.0)) {
    throw ConfigError("t_a must be in [0, 1)");
  }
  if (min_apps < 2) {
    throw ConfigError("min_apps must be at least 2");
  }
  if (pairs_per_candidate < 1) {
    throw ConfigError("pairs_per_candidate must be at least 1");
  }
}

std::optional<double> LibraryVerdict::max_pkg_sim() const {
  std::optional<double> best;
  for (const auto& p : pairs) {
    if (p.pkg_sim && (!best || *p.pkg_sim > *best)) {
      best = p.pkg_sim;
    }
  }
  return best;
}

std::optional<double> LibraryVerdict::min_app_sim() const {
  std::optional<double> best;
  for (const auto& p : pairs) {
    if (p.pkg_sim && (!best || p.app_sim < *best)) {
      best = p.app_sim;
    }
  }
  return best;
}

bool Whitelist::contains(const PackageId& pkg) const {
  return std::binary_search(entries.begin(), entries.end(), pkg);
}

std::vector<CandidateStats> extract_candidates(const Corpus& corpus) {
  std::vector<CandidateStats> out;
  for (auto& [pkg, apps] : build_package_index(corpus)) {
    out.push_back({pkg, apps.size()});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CandidateStats& a, const CandidateStats& b) {
                     return a.n_shared_apps > b.n_shared_apps;
                   });
  return out;
}

bool is_obfuscated(const PackageId& pkg) {
  return std::any_of(pkg.segments().begin(), pkg.segments().end(),
                     [](const std::string& s) { return s.size() == 1; });
}

std::pair<std::vector<CandidateStats>, RefinementReport> refine_candidates(
    const std::vector<CandidateStats>& candidates,
    const HarvestConfig& config) {
  RefinementReport report;
  report.distinct_packages = candidates.size();
  std::vector<CandidateStats> kept;
  for (const auto& c : candidates) {
    report.total_packages += c.n_shared_apps;
    if (c.n_shared_apps <= config.min_apps) {
      continue;
    }
    ++report.above_min_apps;
    if (c.pkg.size() == 1) {
      ++report.removed_one_segment;
    } else if (is_obfuscated(c.pkg)) {
      ++report.removed_obfuscated;
    } else {
      kept.push_back(c);
    }
  }

  std::set<std::string> names;
  for (const auto& c : kept) {
    names.insert(c.pkg.str());
  }
  std::vector<CandidateStats> survivors;
  for (const auto& c : kept) {
    const auto extension = c.pkg.str() + ".";
    auto it = names.lower_bound(extension);
    if (it != names.end() && it->starts_with(extension)) {
      ++report.removed_prefix;
    } else {
      survivors.push_back(c);
    }
  }
  report.final_candidates = survivors.size();
  return {std::move(survivors), report};
}

std::vector<AppPair> sample_pairs(const PackageId& pkg,
                                  std::vector<std::string> containing_apps,
                                  std::uint64_t k, std::uint64_t seed) {
  std::sort(containing_apps.begin(), containing_apps.end());
  containing_apps.erase(
      std::unique(containing_apps.begin(), containing_apps.end()),
      containing_apps.end());
  const std::size_t n = containing_apps.size();
  if (n < 2) {
    throw NotEnoughApps("package '" + pkg.str() + "' occurs in " +
                        std::to_string(n) + " app(s); need at least 2");
  }
  const std::uint64_t universe = std::uint64_t{n} * (n - 1) / 2;
  const auto ranks =
      detail::sample_indices(universe, k, seed ^ fnv1a64(pkg.str()));
  std::vector<AppPair> pairs;
  pairs.reserve(ranks.size());
  for (auto r : ranks) {
    auto [i, j] = unrank_pair(r, n);
    pairs.emplace_back(containing_apps[i], containing_apps[j]);
  }
  return pairs;
}

std::vector<std::string> apps_with_package(const Corpus& corpus,
                                           const PackageId& pkg) {
  std::vector<std::string> out;
  for (const auto& app : corpus.apps()) {
    if (app.packages().count(pkg)) {
      out.push_back(app.app_id);
    }
  }
  return out;
}

std::vector<PairEvidence> score_pairs(const PackageId& pkg,
                                      const std::vector<AppPair>& pairs,
                                      const Corpus& corpus) {
  std::vector<PairEvidence> out;
  for (const auto& pair : pairs) {
    const auto& a = corpus.at(pair.first);
    const auto& b = corpus.at(pair.second);
    PairEvidence ev;
    ev.apps = pair;
    try {
      ev.pkg_sim = package_similarity(a, b, pkg).value;
    } catch (const EmptyComparison&) {
      // undecidable
    }
    try {
      ev.app_sim = app_similarity(a, b).value;
    } catch (const EmptyComparison&) {
      ev.app_sim = 0.0;
    }
    out.push_back(std::move(ev));
  }
  return out;
}

LibraryVerdict apply_thresholds(const PackageId& pkg,
                                std::vector<PairEvidence> evidence, double t_p,
                                double t_a) {
  LibraryVerdict v;
  v.pkg = pkg;
  for (const auto& ev : evidence) {
    if (!ev.pkg_sim) {
      ++v.undecidable_count;
    } else if (*ev.pkg_sim >= t_p && ev.app_sim <= t_a) {
      ++v.pass_count;
    } else {
      ++v.fail_count;
    }
  }
  v.is_library = v.pass_count >= 1;
  v.pairs = std::move(evidence);
  return v;
}

LibraryVerdict decide_library(const PackageId& pkg,
                              const std::vector<AppPair>& pairs,
                              const Corpus& corpus,
                              const HarvestConfig& config) {
  auto verdict = apply_thresholds(pkg, score_pairs(pkg, pairs, corpus),
                                  config.t_p, config.t_a);
  verdict.n_shared_apps = apps_with_package(corpus, pkg).size();
  return verdict;
}

HarvestResult harvest_libraries(const Corpus& corpus,
                                const HarvestConfig& config, int workers) {
  auto pipeline = run_pipeline(corpus, config, workers);
  HarvestResult result;
  result.report = pipeline.report;
  result.whitelist.provenance = config;
  for (auto& sc : pipeline.scored) {
    auto verdict = apply_thresholds(sc.pkg, std::move(sc.evidence), config.t_p,
                                    config.t_a);
    verdict.n_shared_apps = sc.n_shared_apps;
    if (verdict.is_library) {
      result.whitelist.entries.push_back(verdict.pkg);
    }
    result.whitelist.verdicts.push_back(std::move(verdict));
  }
  return result;
}

ThresholdGrid threshold_grid(const Corpus& corpus,
                             std::vector<double> tp_values,
                             std::vector<double> ta_values,
                             const HarvestConfig& config, int workers) {
  std::sort(tp_values.begin(), tp_values.end());
  std::sort(ta_values.begin(), ta_values.end());
  for (double tp : tp_values) {
    HarvestConfig probe = config;
    probe.t_p = tp;
    for (double ta : ta_values) {
      probe.t_a = ta;
      probe.validate();
    }
  }
  const auto pipeline = run_pipeline(corpus, config, workers);
  ThresholdGrid grid;
  grid.tp_values = tp_values;
  grid.ta_values = ta_values;
  for (double tp : tp_values) {
    auto& size_row = grid.sizes.emplace_back();
    auto& entry_row = grid.entries.emplace_back();
    for (double ta : ta_values) {
      auto& cell = entry_row.emplace_back();
      for (const auto& sc : pipeline.scored) {
        if (apply_thresholds(sc.pkg, sc.evidence, tp, ta).is_library) {
          cell.push_back(sc.pkg);
        }
      }
      size_row.push_back(cell.size());
    }
  }
  return grid;
}

std::string format_whitelist(const std::vector<PackageId>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.str();
    out += '\n';
  }
  return out;
}

std::string format_harvest_csv(const Whitelist& whitelist) {
  std::string out =
      "package,n_shared_apps,pairs_tested,pairs_passed,max_pkg_sim,"
      "min_app_sim\n";
  for (const auto& v : whitelist.verdicts) {
    const auto max_pkg = v.max_pkg_sim();
    const auto min_app = v.min_app_sim();
    out += v.pkg.str() + "," + std::to_string(v.n_shared_apps) + "," +
        std::to_string(v.pairs.size()) + "," + std::to_string(v.pass_count) +
        "," + (max_pkg ? format_double(*max_pkg) : "") + "," +
        (min_app ? format_double(*min_app) : "") + "\n";
  }
  return out;
}

std::string format_grid_csv(const ThresholdGrid& grid) {
  std::string out = "t_p,t_a,whitelist_size\n";
  for (std::size_t i = 0; i < grid.tp_values.size(); ++i) {
    for (std::size_t j = 0; j < grid.ta_values.size(); ++j) {
      out += format_double(grid.tp_values[i]) + "," +
          format_double(grid.ta_values[j]) + "," +
          std::to_string(grid.sizes[i][j]) + "\n";
    }
  }
  return out;
}

std::vector<PackageId> parse_whitelist(std::string_view text) {
  std::set<PackageId> entries;
  std::size_t offset = 0;
  while (offset < text.size()) {
    auto newline = text.find('\n', offset);
    auto line = text.substr(offset, newline == std::string_view::npos
                                        ? std::string_view::npos
                                        : newline - offset);
    offset = newline == std::string_view::npos ? text.size() : newline + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
      line.remove_prefix(1);
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    entries.insert(parse_package(line));
  }
  return {entries.begin(), entries.end()};
}

} // namespace commonlibs
