#include "commonlibs/cli.h"

#include <charconv>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "commonlibs/adlib.h"
#include "commonlibs/analytics.h"
#include "commonlibs/errors.h"
#include "commonlibs/ingest.h"
#include "commonlibs/parallel.h"
#include "commonlibs/shipped_data.h"

namespace fs = std::filesystem;

namespace commonlibs {

namespace {

double parse_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" +
                      std::string(value) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) +
                      ": expected a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return v;
}

std::vector<double> parse_double_list(std::string_view key,
                                      std::string_view value) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    auto comma = value.find(',', start);
    auto item = value.substr(start, comma == std::string_view::npos
                                        ? std::string_view::npos
                                        : comma - start);
    out.push_back(parse_double(key, item));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    return {};
  }
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

using Handler = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Handler, std::less<>>& handlers() {
  static const std::map<std::string, Handler, std::less<>> table{
      {"corpus", [](RunConfig& c, std::string_view v) { c.corpus = v; }},
      {"out", [](RunConfig& c, std::string_view v) { c.out = v; }},
      {"t_p",
       [](RunConfig& c, std::string_view v) {
         c.harvest.t_p = parse_double("t_p", v);
       }},
      {"t_a",
       [](RunConfig& c, std::string_view v) {
         c.harvest.t_a = parse_double("t_a", v);
       }},
      {"min_apps",
       [](RunConfig& c, std::string_view v) {
         c.harvest.min_apps = parse_count("min_apps", v);
       }},
      {"pairs",
       [](RunConfig& c, std::string_view v) {
         c.harvest.pairs_per_candidate = parse_count("pairs", v);
       }},
      {"seed",
       [](RunConfig& c, std::string_view v) {
         c.harvest.seed = parse_count("seed", v);
       }},
      {"workers",
       [](RunConfig& c, std::string_view v) {
         c.workers = static_cast<int>(parse_count("workers", v));
       }},
      {"wordlist", [](RunConfig& c, std::string_view v) { c.wordlist = v; }},
      {"allow_terms",
       [](RunConfig& c, std::string_view v) { c.allow_terms = v; }},
      {"apilist", [](RunConfig& c, std::string_view v) { c.apilist = v; }},
      {"whitelist", [](RunConfig& c, std::string_view v) { c.whitelist = v; }},
      {"pairs_file",
       [](RunConfig& c, std::string_view v) { c.pairs_file = v; }},
      {"labels", [](RunConfig& c, std::string_view v) { c.labels = v; }},
      {"threshold",
       [](RunConfig& c, std::string_view v) {
         c.threshold = parse_double("threshold", v);
       }},
      {"top",
       [](RunConfig& c, std::string_view v) { c.top = parse_count("top", v); }},
      {"sample_k",
       [](RunConfig& c, std::string_view v) {
         c.sample_k = parse_count("sample_k", v);
       }},
      {"verbosity",
       [](RunConfig& c, std::string_view v) {
         c.verbosity = static_cast<int>(parse_count("verbosity", v));
       }},
      {"tp_grid",
       [](RunConfig& c, std::string_view v) {
         c.tp_grid = parse_double_list("tp_grid", v);
       }},
      {"ta_grid",
       [](RunConfig& c, std::string_view v) {
         c.ta_grid = parse_double_list("ta_grid", v);
       }},
      {"sdk",
       [](RunConfig& c, std::string_view v) {
         std::vector<std::string> entries;
         std::size_t start = 0;
         while (start < v.size()) {
           auto comma = v.find(',', start);
           auto item = trim(v.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start));
           if (!item.empty()) {
             entries.emplace_back(item);
           }
           if (comma == std::string_view::npos) {
             break;
           }
           start = comma + 1;
         }
         c.harvest.sdk = SdkPrefixList(std::move(entries));
       }},
  };
  return table;
}

} // namespace

void RunConfig::validate() const {
  harvest.validate();
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("threshold must be in [0, 1]");
  }
  if (workers < 1) {
    throw ConfigError("workers must be at least 1");
  }
  for (double tp : tp_grid) {
    if (!(tp > 0.0 && tp <= 1.0)) {
      throw ConfigError("tp_grid values must be in (0, 1]");
    }
  }
  for (double ta : ta_grid) {
    if (!(ta >= 0.0 && ta < 1.0)) {
      throw ConfigError("ta_grid values must be in [0, 1)");
    }
  }
}

void apply_setting(RunConfig& config, std::string_view key,
                   std::string_view value) {
  auto it = handlers().find(key);
  if (it == handlers().end()) {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
  it->second(config, value);
}

RunConfig parse_config(std::string_view file_text,
                       const std::vector<Setting>& overrides) {
  RunConfig config;
  std::size_t offset = 0;
  int line_no = 0;
  while (offset < file_text.size()) {
    ++line_no;
    auto newline = file_text.find('\n', offset);
    auto line = trim(file_text.substr(
        offset, newline == std::string_view::npos ? std::string_view::npos
                                                  : newline - offset));
    offset = newline == std::string_view::npos ? file_text.size() : newline + 1;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& [key, value] : overrides) {
    apply_setting(config, key, value);
  }
  config.validate();
  return config;
}

void validate_paths(const RunConfig& config) {
  auto require = [](const fs::path& p, const char* what) {
    std::error_code ec;
    if (!p.empty() && !fs::exists(p, ec)) {
      throw ConfigError(std::string(what) + " '" + p.string() +
                        "' does not exist");
    }
  };
  require(config.corpus, "corpus");
  require(config.wordlist, "wordlist");
  require(config.allow_terms, "allow_terms");
  require(config.apilist, "apilist");
  require(config.whitelist, "whitelist");
  require(config.pairs_file, "pairs_file");
  require(config.labels, "labels");
}

std::string format_score(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, ptr);
  if (out.find_first_of(".en") == std::string::npos) {
    out += ".0";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Context {
  RunConfig config;
  std::string app_a;
  std::string app_b;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& msg) const {
    if (config.verbosity > 0) {
      err << msg << '\n';
    }
  }
};

void require_set(const fs::path& p, const char* flag) {
  if (p.empty()) {
    throw ConfigError(std::string(flag) + " is required");
  }
}

Corpus load_corpus(const Context& ctx) {
  require_set(ctx.config.corpus, "--corpus");
  auto corpus = load_corpus_dir(ctx.config.corpus, ctx.config.workers);
  ctx.log("loaded " + std::to_string(corpus.size()) + " apps from " +
          ctx.config.corpus.string());
  return corpus;
}

std::vector<PackageId> load_whitelist(const Context& ctx) {
  require_set(ctx.config.whitelist, "--whitelist");
  try {
    return parse_whitelist(read_file(ctx.config.whitelist));
  } catch (const MalformedPackage& e) {
    throw FormatError(ctx.config.whitelist.string(), e.what());
  }
}

fs::path output_dir(const Context& ctx) {
  const auto& out = ctx.config.out;
  std::error_code ec;
  if (!ctx.config.corpus.empty() && fs::exists(out, ec) &&
      fs::equivalent(out, ctx.config.corpus, ec)) {
    throw ConfigError("--out must not be the corpus directory");
  }
  fs::create_directories(out, ec);
  if (ec) {
    throw IoError("cannot create '" + out.string() + "': " + ec.message());
  }
  return out;
}

void write_artifact(const Context& ctx, const fs::path& path,
                    std::string_view contents) {
  write_file(path, contents);
  ctx.log("wrote " + path.string());
}

void cmd_ingest(const Context& ctx) {
  require_set(ctx.config.corpus, "--corpus");
  std::vector<fs::path> roots;
  for (const auto& entry : fs::directory_iterator(ctx.config.corpus)) {
    if (entry.is_directory()) {
      roots.push_back(entry.path());
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<AppDescriptor> apps(roots.size());
  std::vector<std::vector<std::string>> warnings(roots.size());
  std::vector<std::vector<ParseFailure>> failures(roots.size());
  parallel_for(roots.size(), ctx.config.workers, [&](std::size_t i) {
    const auto app_id = roots[i].filename().string();
    try {
      apps[i] = load_app_from_smali_dir(roots[i], app_id, ctx.config.harvest.sdk,
                                        &warnings[i]);
    } catch (const ParseError& e) {
      for (auto f : e.failures()) {
        f.file = app_id + "/" + f.file;
        failures[i].push_back(std::move(f));
      }
    }
  });
  std::vector<ParseFailure> all;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    for (const auto& w : warnings[i]) {
      ctx.err << "warning: " << w << '\n';
    }
    all.insert(all.end(), failures[i].begin(), failures[i].end());
  }
  if (!all.empty()) {
    throw ParseError(std::move(all));
  }
  Corpus corpus(std::move(apps));
  const auto out = output_dir(ctx);
  save_corpus_dir(corpus, out);
  ctx.log("wrote " + std::to_string(corpus.size()) + " descriptors to " +
          out.string());
}

std::string format_refinement(const RefinementReport& r) {
  return "stage,count\n"
         "total_packages," + std::to_string(r.total_packages) + "\n" +
      "distinct_packages," + std::to_string(r.distinct_packages) + "\n" +
      "above_min_apps," + std::to_string(r.above_min_apps) + "\n" +
      "removed_one_segment," + std::to_string(r.removed_one_segment) + "\n" +
      "removed_obfuscated," + std::to_string(r.removed_obfuscated) + "\n" +
      "removed_prefix," + std::to_string(r.removed_prefix) + "\n" +
      "final_candidates," + std::to_string(r.final_candidates) + "\n";
}

void cmd_harvest(const Context& ctx) {
  const auto corpus = load_corpus(ctx);
  const auto result =
      harvest_libraries(corpus, ctx.config.harvest, ctx.config.workers);
  const auto out = output_dir(ctx);
  write_artifact(ctx, out / "whitelist.txt",
                 format_whitelist(result.whitelist.entries));
  write_artifact(ctx, out / "harvest_report.csv",
                 format_harvest_csv(result.whitelist));
  write_artifact(ctx, out / "refinement.csv", format_refinement(result.report));
  for (const auto& v : result.whitelist.verdicts) {
    if (v.undecidable_count == v.pairs.size()) {
      ctx.log("undecidable candidate " + v.pkg.str());
    }
  }
  ctx.log(std::to_string(result.report.final_candidates) + " candidates, " +
          std::to_string(result.whitelist.entries.size()) + " libraries");
}

void cmd_grid(const Context& ctx) {
  const auto corpus = load_corpus(ctx);
  const auto grid =
      threshold_grid(corpus, ctx.config.tp_grid, ctx.config.ta_grid,
                     ctx.config.harvest, ctx.config.workers);
  const auto out = output_dir(ctx);
  write_artifact(ctx, out / "grid.csv", format_grid_csv(grid));
}

void cmd_ads(const Context& ctx) {
  const auto corpus = load_corpus(ctx);
  const auto whitelist = load_whitelist(ctx);
  const auto words = ctx.config.wordlist.empty()
      ? std::string(shipped_ad_words())
      : read_file(ctx.config.wordlist);
  const auto allow = ctx.config.allow_terms.empty()
      ? std::string()
      : read_file(ctx.config.allow_terms);
  const auto wl = AdWordlist::from_text(words, allow);
  const auto apis = ctx.config.apilist.empty()
      ? InternetApiList()
      : InternetApiList::from_text(read_file(ctx.config.apilist));
  AdConfig ad_config;
  ad_config.sample_k = ctx.config.sample_k;
  ad_config.seed = ctx.config.harvest.seed;
  ad_config.workers = ctx.config.workers;
  const auto report =
      detect_ad_libraries(whitelist, corpus, wl, apis, ad_config);
  const auto out = output_dir(ctx);
  write_artifact(ctx, out / "ad_libraries.csv", format_ad_csv(report));
  write_artifact(ctx, out / "ad_whitelist.txt",
                 format_whitelist(report.ad_libraries()));
  const auto& n = report.counts;
  ctx.log("internet=" + std::to_string(n.internet) +
          " view=" + std::to_string(n.view) +
          " component=" + std::to_string(n.component) +
          " all_three=" + std::to_string(n.all_three) +
          " keyword=" + std::to_string(n.keyword) +
          " ads=" + std::to_string(n.ads));
}

void cmd_simpair(const Context& ctx) {
  if (ctx.app_a.empty() || ctx.app_b.empty()) {
    throw ConfigError("--a and --b are required");
  }
  const auto corpus = load_corpus(ctx);
  const auto score =
      app_similarity(corpus.at(ctx.app_a), corpus.at(ctx.app_b));
  ctx.out << format_score(score.value) << '\n';
}

void cmd_pairs(const Context& ctx) {
  require_set(ctx.config.pairs_file, "--pairs-file");
  const auto corpus = load_corpus(ctx);
  const auto whitelist = load_whitelist(ctx);
  const auto pairs = parse_pairs_csv(read_file(ctx.config.pairs_file));
  const auto reports = pairwise_piggyback(pairs, corpus, whitelist,
                                          ctx.config.threshold,
                                          ctx.config.workers);
  const auto out = output_dir(ctx);
  write_artifact(ctx, out / "pairs.csv", format_pairs_csv(reports));
}

void cmd_stats(const Context& ctx) {
  const auto corpus = load_corpus(ctx);
  const auto whitelist = load_whitelist(ctx);
  const auto ranking = popularity(corpus, whitelist, ctx.config.top);
  const auto proportion = library_code_proportion(corpus, whitelist);
  const auto out = output_dir(ctx);
  write_artifact(ctx, out / "popularity.csv", format_popularity_csv(ranking));
  write_artifact(ctx, out / "proportion.csv",
                 format_proportion_csv(proportion));
  ctx.out << "median_p," << format_score(proportion.median) << '\n'
          << "fraction_p_at_least_0.5,"
          << format_score(proportion.fraction_at_least_half) << '\n';
}

void cmd_features(const Context& ctx) {
  const auto corpus = load_corpus(ctx);
  const auto whitelist = load_whitelist(ctx);
  std::optional<std::map<std::string, std::string>> labels;
  if (!ctx.config.labels.empty()) {
    labels = parse_labels_csv(read_file(ctx.config.labels));
  }
  const auto matrix = export_features(corpus, whitelist, labels);
  const auto out = output_dir(ctx);
  write_artifact(ctx, out / "features.csv", format_features_csv(matrix));
}

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--corpus", "corpus", "Descriptor directory (smali tree root for ingest)"},
    {"--out", "out", "Output directory"},
    {"--tp", "t_p", "Package-similarity threshold (default 0.9)"},
    {"--ta", "t_a", "App-similarity threshold (default 0.1)"},
    {"--min-apps", "min_apps", "Candidates must occur in more apps (default 10)"},
    {"--pairs", "pairs", "App pairs sampled per candidate (default 10)"},
    {"--seed", "seed", "Sampling seed"},
    {"--workers", "workers", "Worker threads"},
    {"--wordlist", "wordlist", "Words containing 'ad', one per line"},
    {"--allow-terms", "allow_terms", "Terms that always mark an ad library"},
    {"--apilist", "apilist", "Internet API signatures or class prefixes"},
    {"--whitelist", "whitelist", "Library whitelist, one package per line"},
    {"--pairs-file", "pairs_file", "CSV app_a,app_b"},
    {"--labels", "labels", "CSV app_id,label"},
    {"--threshold", "threshold", "Piggybacking threshold (default 0.8)"},
    {"--top", "top", "Popularity ranking length (default 20)"},
    {"--sample-k", "sample_k", "Apps inspected for Internet API use"},
    {"--tp-grid", "tp_grid", "Comma-separated t_p values for grid"},
    {"--ta-grid", "ta_grid", "Comma-separated t_a values for grid"},
    {"--verbosity", "verbosity", "0 silences progress output"},
};

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Common library harvesting over app corpora", "commonlibs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file");
  std::map<std::string, std::string> flag_values;
  for (const auto& spec : kFlags) {
    app.add_option(spec.flag, flag_values[spec.key], spec.help);
  }

  using Command = void (*)(const Context&);
  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"ingest", {"Convert smali trees into descriptors", cmd_ingest}},
      {"harvest", {"Harvest common libraries", cmd_harvest}},
      {"grid", {"Whitelist sizes over a threshold grid", cmd_grid}},
      {"ads", {"Label ad libraries in a whitelist", cmd_ads}},
      {"simpair", {"Print the similarity of two apps", cmd_simpair}},
      {"pairs", {"Re-score app pairs without whitelisted code", cmd_pairs}},
      {"stats", {"Library popularity and code proportion", cmd_stats}},
      {"features", {"Export library presence features", cmd_features}},
  };
  std::string app_a;
  std::string app_b;
  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    if (std::string_view(name) == "simpair") {
      sub->add_option("--a", app_a, "First app id")->required();
      sub->add_option("--b", app_b, "Second app id")->required();
    }
    dispatch[sub] = entry.second;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    std::vector<Setting> overrides;
    for (const auto& spec : kFlags) {
      if (app.count(spec.flag) > 0) {
        overrides.emplace_back(spec.key, flag_values[spec.key]);
      }
    }
    std::string file_text;
    if (!config_path.empty()) {
      try {
        file_text = read_file(config_path);
      } catch (const IoError& e) {
        throw ConfigError(e.what());
      }
    }
    Context ctx{parse_config(file_text, overrides), app_a, app_b, out, err};
    validate_paths(ctx.config);
    for (auto* sub : app.get_subcommands()) {
      dispatch.at(sub)(ctx);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace commonlibs
