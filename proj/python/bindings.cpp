#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "commonlibs/adlib.h"
#include "commonlibs/analytics.h"
#include "commonlibs/cli.h"
#include "commonlibs/errors.h"
#include "commonlibs/harvest.h"
#include "commonlibs/ingest.h"
#include "commonlibs/shipped_data.h"
#include "commonlibs/similarity.h"

namespace py = pybind11;
using namespace commonlibs;

namespace {

std::vector<std::string> names(const std::vector<PackageId>& v) {
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& p : v) out.push_back(p.str());
  return out;
}

std::vector<PackageId> packages(const std::vector<std::string>& v) {
  std::vector<PackageId> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(parse_package(s));
  return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Common library harvesting over app corpora";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<FormatError>(m, "FormatError", base);
  py::register_exception<MalformedPackage>(m, "MalformedPackage", base);
  py::register_exception<EmptyComparison>(m, "EmptyComparison", base);
  py::register_exception<UnknownApp>(m, "UnknownApp", base);
  py::register_exception<IoError>(m, "IoError", base);

  m.def("normalize_package",
        [](const std::string& name) -> std::optional<std::string> {
          auto p = normalize_package(name);
          return p ? std::optional<std::string>(p->str()) : std::nullopt;
        },
        py::arg("name"));

  m.def("similarity_score",
        [](std::uint64_t identical, std::uint64_t similar,
           std::uint64_t deleted, std::uint64_t added) {
          return similarity_score({identical, similar, deleted, added}).value;
        },
        py::arg("identical"), py::arg("similar"), py::arg("deleted"),
        py::arg("new"));

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<>())
      .def_static("load", &load_corpus_dir, py::arg("path"), py::arg("workers") = 1)
      .def_static("from_smali_dirs",
                  [](const std::vector<std::filesystem::path>& roots) {
                    std::vector<AppDescriptor> apps;
                    for (const auto& r : roots) {
                      apps.push_back(load_app_from_smali_dir(
                          r, r.filename().string()));
                    }
                    return Corpus(std::move(apps));
                  },
                  py::arg("roots"))
      .def("save", [](const Corpus& c, const std::filesystem::path& dir) {
        save_corpus_dir(c, dir);
      })
      .def("__len__", &Corpus::size)
      .def_property_readonly("app_ids",
                             [](const Corpus& c) {
                               std::vector<std::string> out;
                               for (const auto& a : c.apps()) out.push_back(a.app_id);
                               return out;
                             })
      .def("packages",
           [](const Corpus& c, const std::string& app_id) {
             std::vector<std::string> out;
             for (const auto& p : c.at(app_id).packages()) out.push_back(p.str());
             return out;
           })
      .def("app_similarity",
           [](const Corpus& c, const std::string& a, const std::string& b) {
             return app_similarity(c.at(a), c.at(b)).value;
           })
      .def("package_similarity",
           [](const Corpus& c, const std::string& a, const std::string& b,
              const std::string& pkg) {
             return package_similarity(c.at(a), c.at(b), parse_package(pkg)).value;
           });

  py::class_<HarvestConfig>(m, "HarvestConfig")
      .def(py::init([](double t_p, double t_a, std::uint64_t min_apps,
                       std::uint64_t pairs, std::uint64_t seed) {
             HarvestConfig c;
             c.t_p = t_p;
             c.t_a = t_a;
             c.min_apps = min_apps;
             c.pairs_per_candidate = pairs;
             c.seed = seed;
             c.validate();
             return c;
           }),
           py::arg("t_p") = 0.9, py::arg("t_a") = 0.1, py::arg("min_apps") = 10,
           py::arg("pairs_per_candidate") = 10, py::arg("seed") = 0)
      .def_readonly("t_p", &HarvestConfig::t_p)
      .def_readonly("t_a", &HarvestConfig::t_a)
      .def_readonly("min_apps", &HarvestConfig::min_apps)
      .def_readonly("pairs_per_candidate", &HarvestConfig::pairs_per_candidate)
      .def_readonly("seed", &HarvestConfig::seed);

  m.def("harvest",
        [](const Corpus& corpus, const HarvestConfig& config, int workers) {
          const auto r = harvest_libraries(corpus, config, workers);
          py::dict report;
          report["total_packages"] = r.report.total_packages;
          report["distinct_packages"] = r.report.distinct_packages;
          report["above_min_apps"] = r.report.above_min_apps;
          report["removed_one_segment"] = r.report.removed_one_segment;
          report["removed_obfuscated"] = r.report.removed_obfuscated;
          report["removed_prefix"] = r.report.removed_prefix;
          report["final_candidates"] = r.report.final_candidates;
          return py::make_tuple(names(r.whitelist.entries), report,
                                format_harvest_csv(r.whitelist));
        },
        py::arg("corpus"), py::arg("config") = HarvestConfig{},
        py::arg("workers") = 1,
        "Returns (whitelist, refinement report, harvest CSV).");

  m.def("threshold_grid",
        [](const Corpus& corpus, std::vector<double> tps, std::vector<double> tas,
           const HarvestConfig& config, int workers) {
          const auto g = threshold_grid(corpus, tps, tas, config, workers);
          py::dict out;
          for (std::size_t i = 0; i < g.tp_values.size(); ++i) {
            for (std::size_t j = 0; j < g.ta_values.size(); ++j) {
              out[py::make_tuple(g.tp_values[i], g.ta_values[j])] =
                  names(g.entries[i][j]);
            }
          }
          return out;
        },
        py::arg("corpus"), py::arg("tp_values"), py::arg("ta_values"),
        py::arg("config") = HarvestConfig{}, py::arg("workers") = 1);

  m.def("keyword_flag",
        [](const std::string& pkg) {
          static const AdWordlist wl = AdWordlist::from_text(shipped_ad_words());
          return keyword_flag(parse_package(pkg), wl);
        },
        py::arg("package"), "Keyword rule with the built-in word list.");

  m.def("detect_ads",
        [](const Corpus& corpus, const std::vector<std::string>& whitelist,
           std::uint64_t sample_k, std::uint64_t seed) {
          AdConfig config;
          config.sample_k = sample_k;
          config.seed = seed;
          const auto report = detect_ad_libraries(
              packages(whitelist), corpus, AdWordlist::from_text(shipped_ad_words()),
              InternetApiList(), config);
          py::list out;
          for (const auto& e : report.evidence) {
            py::dict row;
            row["package"] = e.pkg.str();
            row["keyword"] = e.keyword_flag;
            row["internet"] = e.uses_internet;
            row["component"] = e.has_component;
            row["view"] = e.has_view;
            row["is_ad"] = e.is_ad;
            out.append(row);
          }
          return out;
        },
        py::arg("corpus"), py::arg("whitelist"), py::arg("sample_k") = 10,
        py::arg("seed") = 0);

  m.def("pairwise_piggyback",
        [](const Corpus& corpus, const std::vector<AppPair>& pairs,
           const std::vector<std::string>& whitelist, double threshold) {
          py::list out;
          for (const auto& r :
               pairwise_piggyback(pairs, corpus, packages(whitelist), threshold)) {
            py::dict row;
            row["app_a"] = r.app_a;
            row["app_b"] = r.app_b;
            row["sim_full"] = r.sim_full;
            row["sim_excluding"] = r.sim_excluding;
            row["label_full"] = std::string(to_string(r.label_full));
            row["label_excluding"] =
                r.label_excluding
                    ? std::optional<std::string>(to_string(*r.label_excluding))
                    : std::nullopt;
            out.append(row);
          }
          return out;
        },
        py::arg("corpus"), py::arg("pairs"), py::arg("whitelist"),
        py::arg("threshold") = 0.8);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<const char*> argv{"commonlibs"};
          for (const auto& a : args) argv.push_back(a.c_str());
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool; returns (code, stdout, stderr).");
}
