#include "commonlibs/adlib.h"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "commonlibs/digest.h"
#include "commonlibs/errors.h"
#include "commonlibs/parallel.h"
#include "sampling.h"

namespace commonlibs {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t offset = 0;
  while (offset < text.size()) {
    auto newline = text.find('\n', offset);
    auto line = text.substr(offset, newline == std::string_view::npos
                                        ? std::string_view::npos
                                        : newline - offset);
    offset = newline == std::string_view::npos ? text.size() : newline + 1;
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) {
      continue;
    }
    auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    if (line.front() == '#') {
      continue;
    }
    fn(line);
  }
}

std::vector<std::string_view> letter_runs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !(s[i] >= 'a' && s[i] <= 'z')) {
      ++i;
    }
    auto start = i;
    while (i < s.size() && s[i] >= 'a' && s[i] <= 'z') {
      ++i;
    }
    if (i > start) {
      out.push_back(s.substr(start, i - start));
    }
  }
  return out;
}

constexpr std::size_t kMinSubstringAllowTerm = 4;

} // namespace

AdWordlist::AdWordlist(std::vector<std::string> exclusion_words,
                       std::vector<std::string> allow_terms) {
  for (auto& t : allow_terms) {
    if (!t.empty()) {
      allow_.insert(lowercase(t));
    }
  }
  for (auto& w : exclusion_words) {
    auto word = lowercase(w);
    if (word.find("ad") == std::string::npos || allow_.count(word)) {
      continue;
    }
    longest_ = std::max(longest_, word.size());
    exclusion_.insert(std::move(word));
  }
}

AdWordlist AdWordlist::from_text(std::string_view words,
                                 std::string_view allow_terms) {
  std::vector<std::string> exclusion;
  for_each_line(words, [&](std::string_view w) { exclusion.emplace_back(w); });
  std::vector<std::string> allow;
  for_each_line(allow_terms, [&](std::string_view t) { allow.emplace_back(t); });
  if (allow.empty()) {
    allow = default_allow_terms();
  }
  return AdWordlist(std::move(exclusion), std::move(allow));
}

std::vector<std::string> AdWordlist::default_allow_terms() {
  return {"ad",     "ads",     "adview", "advert",   "adverts",
          "adsdk",  "adserver", "admob"};
}

bool keyword_flag(const PackageId& pkg, const AdWordlist& wl) {
  for (const auto& raw : pkg.segments()) {
    const auto seg = lowercase(raw);
    for (auto run : letter_runs(seg)) {
      for (const auto& term : wl.allow_) {
        const bool hit = term.size() < kMinSubstringAllowTerm
            ? run == term
            : run.find(term) != std::string_view::npos;
        if (hit) {
          return true;
        }
      }
    }
    std::string_view view(seg);
    for (auto pos = view.find("ad"); pos != std::string_view::npos;
         pos = view.find("ad", pos + 1)) {
      // Covered when some exclusion word occupies [start, start+len) with
      // start <= pos and pos + 2 <= start + len.
      bool covered = false;
      const auto lowest =
          pos + 2 > wl.longest_ ? pos + 2 - wl.longest_ : std::size_t{0};
      for (auto start = lowest; start <= pos && !covered; ++start) {
        const auto max_len = std::min(wl.longest_, view.size() - start);
        for (auto len = pos + 2 - start; len <= max_len; ++len) {
          if (wl.exclusion_.count(std::string(view.substr(start, len)))) {
            covered = true;
            break;
          }
        }
      }
      if (!covered) {
        return true;
      }
    }
  }
  return false;
}

InternetApiList::InternetApiList()
    : InternetApiList(std::vector<std::string>{
          "java.net.", "javax.net.", "org.apache.http.", "android.net.http.",
          "android.webkit.WebView."}) {}

InternetApiList::InternetApiList(std::vector<std::string> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw ConfigError("Internet API list is empty");
  }
  for (const auto& e : entries_) {
    if (e.find(": ") != std::string::npos) {
      signatures_.insert(MethodSignature::parse(e).canonical());
    } else if (!e.empty() && e.back() == '.') {
      prefixes_.push_back(e);
    } else {
      throw ConfigError("Internet API entry '" + e +
                        "' is neither a signature nor a prefix ending in '.'");
    }
  }
}

InternetApiList InternetApiList::from_text(std::string_view text) {
  std::vector<std::string> entries;
  for_each_line(text, [&](std::string_view line) { entries.emplace_back(line); });
  return InternetApiList(std::move(entries));
}

bool InternetApiList::matches(const MethodSignature& target) const {
  const auto& cls = target.class_name;
  for (const auto& p : prefixes_) {
    if (cls.starts_with(p) ||
        std::string_view(cls) == std::string_view(p).substr(0, p.size() - 1)) {
      return true;
    }
  }
  return !signatures_.empty() && signatures_.count(target.canonical()) > 0;
}

bool ViewRoots::matches(std::string_view class_name) const {
  if (exact.count(std::string(class_name))) {
    return true;
  }
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) {
                       return class_name.starts_with(p);
                     });
}

std::vector<const AppDescriptor*> apps_containing(const Corpus& corpus,
                                                  const PackageId& pkg) {
  std::vector<const AppDescriptor*> out;
  for (const auto& app : corpus.apps()) {
    const bool has = std::any_of(
        app.classes.begin(), app.classes.end(),
        [&](const ClassRecord& c) { return class_in_package(c.name, pkg); });
    if (has) {
      out.push_back(&app);
    }
  }
  return out;
}

namespace {

std::vector<const AppDescriptor*> require_apps(const Corpus& corpus,
                                               const PackageId& pkg) {
  auto apps = apps_containing(corpus, pkg);
  if (apps.empty()) {
    throw UnknownPackage(pkg.str());
  }
  return apps;
}

} // namespace

bool uses_internet(const PackageId& pkg, const Corpus& corpus,
                   const InternetApiList& apis, std::uint64_t sample_k,
                   std::uint64_t seed) {
  auto apps = require_apps(corpus, pkg);
  std::vector<const AppDescriptor*> permitted;
  for (const auto* app : apps) {
    if (app->has_permission(kInternetPermission)) {
      permitted.push_back(app);
    }
  }
  if (permitted.empty()) {
    return false;
  }
  const auto picks =
      detail::sample_indices(permitted.size(), sample_k, seed ^ fnv1a64(pkg.str()));
  for (auto i : picks) {
    for (const auto* m : methods_of_package(*permitted[i], pkg)) {
      for (const auto& insn : m->raw_body) {
        if (insn.target && apis.matches(*insn.target)) {
          return true;
        }
      }
    }
  }
  return false;
}

bool declares_component(const PackageId& pkg, const Corpus& corpus) {
  for (const auto* app : require_apps(corpus, pkg)) {
    for (const auto& comp : app->components) {
      if (class_in_package(comp.class_name, pkg)) {
        return true;
      }
    }
  }
  return false;
}

bool declares_view(const PackageId& pkg, const Corpus& corpus,
                   const ViewRoots& roots) {
  for (const auto* app : require_apps(corpus, pkg)) {
    std::unordered_map<std::string_view, const ClassRecord*> table;
    for (const auto& c : app->classes) {
      table.emplace(c.name, &c);
    }
    for (const auto& c : app->classes) {
      if (!class_in_package(c.name, pkg)) {
        continue;
      }
      std::set<std::string_view> visited{c.name};
      auto next = c.super_name ? std::optional<std::string_view>(*c.super_name)
                               : std::nullopt;
      while (next) {
        if (roots.matches(*next)) {
          return true;
        }
        if (!visited.insert(*next).second) {
          break;
        }
        auto it = table.find(*next);
        if (it == table.end() || !it->second->super_name) {
          break;
        }
        next = *it->second->super_name;
      }
    }
  }
  return false;
}

std::vector<PackageId> AdReport::ad_libraries() const {
  std::vector<PackageId> out;
  for (const auto& e : evidence) {
    if (e.is_ad) {
      out.push_back(e.pkg);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

AdReport detect_ad_libraries(const std::vector<PackageId>& whitelist,
                             const Corpus& corpus, const AdWordlist& wl,
                             const InternetApiList& apis,
                             const AdConfig& config) {
  AdReport report;
  report.evidence.resize(whitelist.size());
  parallel_for(whitelist.size(), config.workers, [&](std::size_t i) {
    auto& ev = report.evidence[i];
    ev.pkg = whitelist[i];
    ev.keyword_flag = keyword_flag(ev.pkg, wl);
    if (!apps_containing(corpus, ev.pkg).empty()) {
      ev.uses_internet =
          uses_internet(ev.pkg, corpus, apis, config.sample_k, config.seed);
      ev.has_component = declares_component(ev.pkg, corpus);
      ev.has_view = declares_view(ev.pkg, corpus, config.view_roots);
    }
    ev.is_ad = ev.keyword_flag ||
        (ev.uses_internet && ev.has_component && ev.has_view);
  });
  auto& n = report.counts;
  for (const auto& ev : report.evidence) {
    n.internet += ev.uses_internet;
    n.view += ev.has_view;
    n.component += ev.has_component;
    n.internet_view += ev.uses_internet && ev.has_view;
    n.internet_component += ev.uses_internet && ev.has_component;
    n.view_component += ev.has_view && ev.has_component;
    n.all_three += ev.uses_internet && ev.has_view && ev.has_component;
    n.keyword += ev.keyword_flag;
    n.ads += ev.is_ad;
  }
  return report;
}

std::string format_ad_csv(const AdReport& report) {
  std::string out = "package,keyword,internet,component,view,is_ad\n";
  auto bit = [](bool b) { return b ? "1" : "0"; };
  for (const auto& e : report.evidence) {
    out += e.pkg.str() + "," + bit(e.keyword_flag) + "," +
        bit(e.uses_internet) + "," + bit(e.has_component) + "," +
        bit(e.has_view) + "," + bit(e.is_ad) + "\n";
  }
  return out;
}

} // namespace commonlibs
