#include "commonlibs/analytics.h"

#include <algorithm>
#include <cstdio>

#include "commonlibs/errors.h"
#include "commonlibs/parallel.h"
#include "commonlibs/similarity.h"

namespace commonlibs {

namespace {

bool in_any(std::string_view class_name,
            const std::vector<PackageId>& packages) {
  return std::any_of(packages.begin(), packages.end(),
                     [&](const PackageId& p) {
                       return class_in_package(class_name, p);
                     });
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text,
                                                    std::size_t columns,
                                                    const char* what) {
  std::vector<std::vector<std::string>> rows;
  std::size_t offset = 0;
  int line_no = 0;
  bool header = true;
  while (offset < text.size()) {
    ++line_no;
    auto newline = text.find('\n', offset);
    auto line = text.substr(offset, newline == std::string_view::npos
                                        ? std::string_view::npos
                                        : newline - offset);
    offset = newline == std::string_view::npos ? text.size() : newline + 1;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      fields.emplace_back(line.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start));
      if (comma == std::string_view::npos) {
        break;
      }
      start = comma + 1;
    }
    if (fields.size() != columns ||
        std::any_of(fields.begin(), fields.end(),
                    [](const std::string& f) { return f.empty(); })) {
      throw ParseError(what, line_no,
                       "expected " + std::to_string(columns) +
                           " non-empty fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

} // namespace

AppDescriptor strip_whitelist(const AppDescriptor& app,
                              const std::vector<PackageId>& whitelist) {
  AppDescriptor out;
  out.app_id = app.app_id;
  out.cert_id = app.cert_id;
  out.permissions = app.permissions;
  out.components = app.components;
  for (const auto& c : app.classes) {
    if (!in_any(c.name, whitelist)) {
      out.classes.push_back(c);
    }
  }
  return out;
}

std::string_view to_string(PairLabel label) {
  return label == PairLabel::Piggybacked ? "piggybacked" : "distinct";
}

std::vector<AppPair> parse_pairs_csv(std::string_view text) {
  std::vector<AppPair> out;
  for (auto& row : parse_csv_rows(text, 2, "pairs")) {
    out.emplace_back(std::move(row[0]), std::move(row[1]));
  }
  return out;
}

std::vector<PairReport> pairwise_piggyback(
    const std::vector<AppPair>& pairs, const Corpus& corpus,
    const std::vector<PackageId>& whitelist, double threshold, int workers) {
  for (const auto& [a, b] : pairs) {
    corpus.at(a);
    corpus.at(b);
  }
  auto label = [&](double sim) {
    return sim >= threshold ? PairLabel::Piggybacked : PairLabel::Distinct;
  };
  std::vector<PairReport> out(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    const auto& a = corpus.at(pairs[i].first);
    const auto& b = corpus.at(pairs[i].second);
    auto& r = out[i];
    r.app_a = a.app_id;
    r.app_b = b.app_id;
    try {
      r.sim_full = app_similarity(a, b).value;
    } catch (const EmptyComparison&) {
      r.sim_full = 0.0;
    }
    r.label_full = label(r.sim_full);
    try {
      r.sim_excluding = app_similarity(strip_whitelist(a, whitelist),
                                       strip_whitelist(b, whitelist))
                            .value;
      r.label_excluding = label(*r.sim_excluding);
    } catch (const EmptyComparison&) {
      // undecidable after stripping
    }
  });
  return out;
}

std::string format_pairs_csv(const std::vector<PairReport>& reports) {
  std::string out =
      "app_a,app_b,sim_full,sim_excluding,label_full,label_excluding\n";
  for (const auto& r : reports) {
    out += r.app_a + "," + r.app_b + "," + format_double(r.sim_full) + "," +
        (r.sim_excluding ? format_double(*r.sim_excluding) : "") + "," +
        std::string(to_string(r.label_full)) + "," +
        (r.label_excluding ? std::string(to_string(*r.label_excluding))
                           : "undecidable") +
        "\n";
  }
  return out;
}

std::vector<std::pair<PackageId, std::uint64_t>> popularity(
    const Corpus& corpus, const std::vector<PackageId>& whitelist,
    std::size_t top_n) {
  std::vector<std::pair<PackageId, std::uint64_t>> ranking;
  for (const auto& pkg : whitelist) {
    std::uint64_t count = 0;
    for (const auto& app : corpus.apps()) {
      count += std::any_of(app.classes.begin(), app.classes.end(),
                           [&](const ClassRecord& c) {
                             return class_in_package(c.name, pkg);
                           });
    }
    ranking.emplace_back(pkg, count);
  }
  std::sort(ranking.begin(), ranking.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  if (ranking.size() > top_n) {
    ranking.resize(top_n);
  }
  return ranking;
}

ProportionReport library_code_proportion(
    const Corpus& corpus, const std::vector<PackageId>& whitelist) {
  ProportionReport report;
  std::vector<double> ps;
  for (const auto& app : corpus.apps()) {
    ProportionRow row;
    row.app_id = app.app_id;
    row.size_app = app.total_size_bytes();
    if (row.size_app == 0) {
      throw EmptyApp(app.app_id);
    }
    for (const auto& c : app.classes) {
      if (in_any(c.name, whitelist)) {
        row.size_lib += c.size_bytes;
      }
    }
    row.p = static_cast<double>(row.size_lib) /
        static_cast<double>(row.size_app);
    ps.push_back(row.p);
    report.rows.push_back(std::move(row));
  }
  if (!ps.empty()) {
    std::sort(ps.begin(), ps.end());
    const auto n = ps.size();
    report.median = n % 2 == 1 ? ps[n / 2] : (ps[n / 2 - 1] + ps[n / 2]) / 2.0;
    const auto half = std::count_if(ps.begin(), ps.end(),
                                    [](double p) { return p >= 0.5; });
    report.fraction_at_least_half =
        static_cast<double>(half) / static_cast<double>(n);
  }
  return report;
}

std::map<std::string, std::string> parse_labels_csv(std::string_view text) {
  std::map<std::string, std::string> out;
  for (auto& row : parse_csv_rows(text, 2, "labels")) {
    out[row[0]] = row[1];
  }
  return out;
}

FeatureMatrix export_features(
    const Corpus& corpus, const std::vector<PackageId>& whitelist,
    const std::optional<std::map<std::string, std::string>>& labels) {
  if (labels) {
    for (const auto& [app_id, label] : *labels) {
      corpus.at(app_id);
    }
  }
  auto sorted = whitelist;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<std::vector<std::uint8_t>> presence(
      corpus.size(), std::vector<std::uint8_t>(sorted.size(), 0));
  std::vector<bool> used(sorted.size(), false);
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto& app = corpus.apps()[r];
    for (std::size_t c = 0; c < sorted.size(); ++c) {
      const bool has = std::any_of(
          app.classes.begin(), app.classes.end(),
          [&](const ClassRecord& k) { return class_in_package(k.name, sorted[c]); });
      presence[r][c] = has ? 1 : 0;
      used[c] = used[c] || has;
    }
  }

  FeatureMatrix m;
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    if (used[c]) {
      m.columns.push_back(sorted[c]);
    }
  }
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    m.rows.push_back(corpus.apps()[r].app_id);
    auto& row = m.cells.emplace_back();
    for (std::size_t c = 0; c < sorted.size(); ++c) {
      if (used[c]) {
        row.push_back(presence[r][c]);
      }
    }
  }
  if (labels) {
    m.labels.emplace();
    for (const auto& id : m.rows) {
      auto it = labels->find(id);
      m.labels->push_back(it == labels->end() ? "" : it->second);
    }
  }
  return m;
}

std::string format_features_csv(const FeatureMatrix& m) {
  std::string out = "app_id";
  for (const auto& c : m.columns) {
    out += "," + c.str();
  }
  if (m.labels) {
    out += ",label";
  }
  out += '\n';
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out += m.rows[r];
    for (auto v : m.cells[r]) {
      out += v ? ",1" : ",0";
    }
    if (m.labels) {
      out += "," + (*m.labels)[r];
    }
    out += '\n';
  }
  return out;
}

std::string format_popularity_csv(
    const std::vector<std::pair<PackageId, std::uint64_t>>& ranking) {
  std::string out = "rank,package,app_count\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out += std::to_string(i + 1) + "," + ranking[i].first.str() + "," +
        std::to_string(ranking[i].second) + "\n";
  }
  return out;
}

std::string format_proportion_csv(const ProportionReport& report) {
  std::string out = "app_id,size_lib,size_app,p\n";
  for (const auto& r : report.rows) {
    out += r.app_id + "," + std::to_string(r.size_lib) + "," +
        std::to_string(r.size_app) + "," + format_double(r.p) + "\n";
  }
  return out;
}

} // namespace commonlibs
