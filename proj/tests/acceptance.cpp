// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "commonlibs/adlib.h"
#include "commonlibs/analytics.h"
#include "commonlibs/cli.h"
#include "commonlibs/errors.h"
#include "commonlibs/harvest.h"
#include "commonlibs/ingest.h"
#include "commonlibs/shipped_data.h"
#include "commonlibs/similarity.h"
#include "oracle.h"
#include "synth.h"

namespace fs = std::filesystem;
using namespace commonlibs;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> names(const std::vector<PackageId>& v) {
  std::vector<std::string> out;
  for (const auto& p : v) out.push_back(p.str());
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out.empty() ? "(none)" : out;
}

MethodSet refs(const std::vector<MethodRecord>& v) {
  MethodSet out;
  for (const auto& m : v) out.push_back(&m);
  return out;
}

AppDescriptor app_of(const std::string& id, const std::vector<MethodRecord>& ms) {
  std::map<std::string, ClassRecord> by_class;
  for (const auto& m : ms) {
    auto& c = by_class[m.signature.class_name];
    c.name = m.signature.class_name;
    c.methods.push_back(m);
  }
  std::vector<ClassRecord> classes;
  for (auto& [_, c] : by_class) classes.push_back(std::move(c));
  return testing::make_app(id, std::move(classes));
}

// Two method sets of at most 8 methods drawn from a small signature pool;
// bodies are drawn from a small body pool so identical bodies are common.
std::pair<std::vector<MethodRecord>, std::vector<MethodRecord>> random_sets(
    std::mt19937_64& rng, testing::Synth& synth) {
  static const char* kClasses[] = {"com.p.A", "com.p.B", "org.q.C"};
  std::vector<MethodRecord> bodies;
  for (int i = 0; i < 3; ++i) bodies.push_back(synth.method("x.Y", "b", 1 + i));
  auto draw = [&](std::size_t max) {
    std::vector<MethodRecord> out;
    std::set<std::string> used;
    const auto n = rng() % (max + 1);
    for (std::size_t i = 0; i < n; ++i) {
      MethodRecord m = bodies[rng() % bodies.size()];
      m.signature = {kClasses[rng() % 3], "void", "m" + std::to_string(rng() % 5),
                     {}};
      if (used.insert(m.signature.canonical()).second) out.push_back(m);
    }
    return out;
  };
  return {draw(8), draw(8)};
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  testing::Synth synth(1);
  int mismatches = 0, empty = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [a, b] = random_sets(rng, synth);
    const auto oc = testing::oracle_diff(a, b);
    const auto d = diff_method_sets(refs(a), refs(b));
    if (d != DiffCounts{oc.identical, oc.similar, oc.deleted, oc.added}) {
      ++mismatches;
      continue;
    }
    if (d.total() == 0) {
      ++empty;
      try {
        similarity_score(d);
        ++mismatches;
      } catch (const EmptyComparison&) {
      }
      continue;
    }
    const auto f = testing::oracle_score(oc);
    const double s = similarity_score(d).value;
    // Exact: the score must be the correctly rounded num/den.
    if (s != static_cast<double>(f.num) / static_cast<double>(f.den)) {
      ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          std::to_string(mismatches) + " mismatches in 1000 pairs (" +
              std::to_string(empty) + " empty), " + std::to_string(secs) + " s"};
}

Outcome criterion2() {
  std::mt19937_64 rng(2);
  testing::Synth synth(2);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    auto [a, b] = random_sets(rng, synth);
    if (a.empty() && b.empty()) a.push_back(synth.method("com.p.A", "z", 2));
    const auto x = app_of("x", a);
    const auto y = app_of("y", b);
    const double s1 = app_similarity(x, y).value;
    const double s2 = app_similarity(y, x).value;
    if (!(s1 >= 0.0 && s1 <= 1.0) || std::memcmp(&s1, &s2, sizeof s1) != 0) {
      ++bad;
    }
  }
  return {bad == 0, std::to_string(bad) + " violations in 10000 fixtures"};
}

Outcome criterion3() {
  const auto fx = testing::planted_corpus(3);
  const auto t0 = Clock::now();
  const auto result = harvest_libraries(fx.corpus, HarvestConfig{});
  const double secs = seconds_since(t0);
  const auto got = names(result.whitelist.entries);
  return {got == fx.libraries && secs < 30.0,
          "whitelist {" + join(got) + "}, expected {" + join(fx.libraries) +
              "}, " + std::to_string(secs) + " s"};
}

Outcome criterion4() {
  const auto corpus = testing::clone_farm(4);
  double min_app = 1.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      min_app = std::min(min_app,
                         app_similarity(corpus.apps()[i], corpus.apps()[j]).value);
    }
  }
  HarvestConfig config;
  config.t_a = 0.1;
  const auto result = harvest_libraries(corpus, config);
  return {min_app >= 0.9 && result.whitelist.entries.empty() &&
              !result.whitelist.verdicts.empty(),
          "min pairwise app_sim " + std::to_string(min_app) + ", " +
              std::to_string(result.whitelist.verdicts.size()) +
              " candidates tested, whitelist {" +
              join(names(result.whitelist.entries)) + "}"};
}

Outcome criterion5() {
  const auto fx = testing::extended_corpus(5);
  const std::vector<double> tps{0.6, 0.7, 0.8, 0.9};
  const std::vector<double> tas{0.1, 0.2, 0.3, 0.4};
  const auto grid = threshold_grid(fx.corpus, tps, tas, HarvestConfig{});
  int violations = 0;
  for (std::size_t i = 0; i < tps.size(); ++i) {
    for (std::size_t j = 0; j < tas.size(); ++j) {
      const std::set<PackageId> inner(grid.entries[i][j].begin(),
                                      grid.entries[i][j].end());
      for (std::size_t i2 = 0; i2 <= i; ++i2) {
        for (std::size_t j2 = j; j2 < tas.size(); ++j2) {
          for (const auto& p : inner) {
            const auto& outer = grid.entries[i2][j2];
            if (!std::binary_search(outer.begin(), outer.end(), p)) ++violations;
          }
        }
      }
    }
  }
  std::string sizes;
  for (const auto& row : grid.sizes) {
    sizes += sizes.empty() ? "" : " / ";
    for (std::size_t j = 0; j < row.size(); ++j) {
      sizes += (j ? "," : "") + std::to_string(row[j]);
    }
  }
  // The grid must actually vary, or monotonicity is vacuous.
  const bool varies = grid.sizes.front().back() > grid.sizes.back().front();
  return {violations == 0 && varies,
          std::to_string(violations) + " subset violations; sizes by t_p " +
              sizes};
}

Outcome criterion6() {
  auto cand = [](const char* p, std::uint64_t n) {
    return CandidateStats{parse_package(p), n};
  };
  const std::vector<CandidateStats> input{
      cand("com.google.ads", 60), cand("com.google", 55),   cand("mobile", 40),
      cand("ads", 35),            cand("a.b.c", 30),         cand("com.x.pay", 25),
      cand("com.flurry", 20),     cand("com.flurry.sdk", 18), cand("org.lib.io", 12),
      cand("com.small.lib", 10),  cand("net.tiny", 3)};
  HarvestConfig config;
  config.min_apps = 10;
  const auto [survivors, r] = refine_candidates(input, config);
  std::vector<std::string> got;
  for (const auto& s : survivors) got.push_back(s.pkg.str());
  const std::vector<std::string> want{"com.google.ads", "com.flurry.sdk",
                                      "org.lib.io"};
  const RefinementReport expected{308, 11, 9, 2, 2, 2, 3};
  std::ostringstream detail;
  detail << r.above_min_apps << " - " << r.removed_one_segment << " - "
         << r.removed_obfuscated << " - " << r.removed_prefix << " = "
         << r.final_candidates << "; survivors {" << join(got) << "}";
  return {got == want && r == expected && r.arithmetic_holds(), detail.str()};
}

Outcome criterion7() {
  const auto wl = AdWordlist::from_text(shipped_ad_words());
  const std::pair<const char*, bool> cases[] = {
      {"com.google.ads", true}, {"com.adsdk.sdk", true}, {"shadow", false},
      {"gadget", false},        {"load", false},         {"adapter", false},
      {"adobe", false}};
  int right = 0;
  std::string wrong;
  for (const auto& [pkg, want] : cases) {
    if (keyword_flag(parse_package(pkg), wl) == want) {
      ++right;
    } else {
      wrong += std::string(" ") + pkg;
    }
  }
  return {right == 7, std::to_string(right) + "/7 verdicts correct" +
                          (wrong.empty() ? "" : "; wrong:" + wrong)};
}

Outcome criterion8() {
  const auto corpus = testing::ad_truth_table_corpus();
  const auto wl = AdWordlist::from_text(shipped_ad_words());
  const std::pair<const char*, bool> cases[] = {{"com.full.kit", true},
                                                {"com.nonet.kit", false},
                                                {"com.nocomp.kit", false},
                                                {"com.noview.kit", false}};
  std::vector<PackageId> whitelist;
  for (const auto& c : cases) whitelist.push_back(parse_package(c.first));
  const auto report = detect_ad_libraries(whitelist, corpus, wl, InternetApiList());
  int right = 0;
  std::string detail;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& e = report.evidence[i];
    const bool ok = e.is_ad == cases[i].second && !e.keyword_flag;
    right += ok;
    detail += std::string(i ? ", " : "") + cases[i].first + "=" +
        (e.is_ad ? "ad" : "not-ad");
  }
  return {right == 4, detail};
}

Outcome criterion9() {
  const auto fx = testing::piggyback_fixture(9);
  const auto reports = pairwise_piggyback({{fx.fp_a, fx.fp_b}, {fx.fn_a, fx.fn_b}},
                                          fx.corpus, fx.whitelist, 0.8);
  const auto& fp = reports[0];
  const auto& fn = reports[1];
  const bool fp_ok = fp.sim_full >= 0.8 && fp.sim_excluding &&
      *fp.sim_excluding < 0.5 && fp.label_full == PairLabel::Piggybacked &&
      fp.label_excluding == PairLabel::Distinct;
  const bool fn_ok = fn.sim_full < 0.5 && fn.sim_excluding &&
      *fn.sim_excluding >= 0.8 && fn.label_full == PairLabel::Distinct &&
      fn.label_excluding == PairLabel::Piggybacked;
  std::ostringstream d;
  d << "false positive " << fp.sim_full << " -> "
    << fp.sim_excluding.value_or(-1) << "; false negative " << fn.sim_full
    << " -> " << fn.sim_excluding.value_or(-1);
  return {fp_ok && fn_ok, d.str()};
}

Outcome criterion10() {
  const auto fx = testing::planted_corpus(3);
  const auto base = fs::temp_directory_path() / "commonlibs_acceptance_det";
  fs::remove_all(base);
  save_corpus_dir(fx.corpus, base / "corpus");
  std::vector<std::vector<std::string>> artifacts;
  bool ran = true;
  for (int workers : {1, 4, 8}) {
    const auto out = base / ("out" + std::to_string(workers));
    const std::string corpus = (base / "corpus").string();
    const std::string out_s = out.string();
    const std::string w = std::to_string(workers);
    const char* argv[] = {"commonlibs", "harvest",     "--corpus", corpus.c_str(),
                          "--out",      out_s.c_str(), "--workers", w.c_str(),
                          "--verbosity", "0"};
    std::ostringstream o, e;
    ran = ran && run_cli(std::size(argv), argv, o, e) == 0;
    std::vector<std::string> files;
    for (const char* f : {"whitelist.txt", "harvest_report.csv", "refinement.csv"}) {
      files.push_back(fs::exists(out / f) ? read_file(out / f) : "");
    }
    artifacts.push_back(std::move(files));
  }
  fs::remove_all(base);
  const bool same = artifacts[0] == artifacts[1] && artifacts[0] == artifacts[2];
  return {ran && same && !artifacts[0][0].empty(),
          std::string(same ? "identical" : "DIFFERENT") +
              " whitelist/report/refinement bytes at 1, 4 and 8 workers"};
}

std::string mutate_text(std::string text, std::mt19937_64& rng) {
  static const char* kTokens[] = {
      ".method ", ".end method", ".class ", "invoke-static {}, ", "->", "(",
      ")", ";", "L", "[", ".annotation", ".end annotation", ".packed-switch",
      "\n", ":label", "#", ".super ", "Lcom/a/B;->f()V", "\xff", "\0"};
  const int steps = 1 + static_cast<int>(rng() % 8);
  for (int s = 0; s < steps; ++s) {
    const std::size_t pos = text.empty() ? 0 : rng() % text.size();
    switch (rng() % 5) {
      case 0:
        if (!text.empty()) text[pos] = static_cast<char>(rng() % 256);
        break;
      case 1:
        text.erase(pos, rng() % 40);
        break;
      case 2:
        text.insert(pos, kTokens[rng() % std::size(kTokens)]);
        break;
      case 3: {
        const auto len = rng() % 80;
        text.insert(pos, text.substr(pos, len));
        break;
      }
      default:
        text.resize(pos);
    }
  }
  return text;
}

Outcome criterion11() {
  const fs::path fixtures = COMMONLIBS_FIXTURE_DIR;
  std::vector<std::string> seeds;
  for (const auto& entry : fs::recursive_directory_iterator(fixtures)) {
    if (entry.path().extension() == ".smali") seeds.push_back(read_file(entry.path()));
  }
  std::sort(seeds.begin(), seeds.end());
  std::mt19937_64 rng(11);
  int parsed = 0, rejected = 0, crashed = 0;
  double slowest = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto text = mutate_text(seeds[rng() % seeds.size()], rng);
    const auto t0 = Clock::now();
    try {
      parse_smali_class(text, "fuzz.smali");
      ++parsed;
    } catch (const ParseError&) {
      ++rejected;
    } catch (...) {
      ++crashed;
    }
    slowest = std::max(slowest, seconds_since(t0));
  }

  int roundtrip_failures = 0;
  std::vector<AppDescriptor> valid{
      load_app_from_smali_dir(fixtures / "apps/sample_app", "sample_app")};
  const auto fx = testing::piggyback_fixture(11);
  for (const auto& app : fx.corpus.apps()) {
    valid.push_back(app);
  }
  for (const auto& app : valid) {
    const auto bytes = save_descriptor(app);
    const auto back = load_descriptor(bytes);
    if (!(back == app) || save_descriptor(back) != bytes) ++roundtrip_failures;
  }
  std::ostringstream d;
  d << "fuzz: " << parsed << " parsed, " << rejected << " rejected, " << crashed
    << " other exceptions, slowest " << slowest << " s; round-trip failures "
    << roundtrip_failures << "/" << valid.size();
  return {crashed == 0 && slowest < 1.0 && roundtrip_failures == 0, d.str()};
}

} // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"similarity oracle equivalence", criterion1},
      {"similarity symmetry and bounds", criterion2},
      {"planted library recovery", criterion3},
      {"repackaging dismissal", criterion4},
      {"threshold monotonicity", criterion5},
      {"candidate refinement", criterion6},
      {"ad keyword rule", criterion7},
      {"ad characteristic intersection", criterion8},
      {"piggyback re-scoring", criterion9},
      {"determinism across workers", criterion10},
      {"parser robustness and round-trip", criterion11},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.ok;
    std::cout << (r.ok ? "PASS" : "FAIL") << " [" << index << "] " << name
              << ": " << r.detail << std::endl;
  }
  std::cout << (std::size(criteria) - failed) << "/" << std::size(criteria)
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
