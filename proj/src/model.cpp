#include "commonlibs/model.h"

#include <algorithm>
#include <numeric>

#include "commonlibs/digest.h"
#include "commonlibs/errors.h"

namespace commonlibs {

namespace {

std::vector<std::string> split_segments(std::string_view raw) {
  std::vector<std::string> segments;
  if (raw.empty()) {
    throw MalformedPackage(std::string(raw));
  }
  std::size_t start = 0;
  while (true) {
    auto dot = raw.find('.', start);
    auto segment = raw.substr(start, dot == std::string_view::npos
                                         ? std::string_view::npos
                                         : dot - start);
    if (segment.empty()) {
      throw MalformedPackage(std::string(raw));
    }
    segments.emplace_back(segment);
    if (dot == std::string_view::npos) {
      break;
    }
    start = dot + 1;
  }
  return segments;
}

bool is_support_library(const std::vector<std::string>& segments) {
  return segments.size() >= 2 && segments[0] == "android" &&
      segments[1] == "support";
}

} // namespace

PackageId::PackageId(std::vector<std::string> segments)
    : segments_(std::move(segments)) {
  for (const auto& s : segments_) {
    if (!dotted_.empty()) {
      dotted_ += '.';
    }
    dotted_ += s;
  }
}

bool PackageId::is_prefix_of(const PackageId& other) const {
  if (segments_.size() > other.segments_.size()) {
    return false;
  }
  return std::equal(segments_.begin(), segments_.end(),
                    other.segments_.begin());
}

std::optional<PackageId> normalize_package(std::string_view raw) {
  auto segments = split_segments(raw);
  if (is_support_library(segments)) {
    return std::nullopt;
  }
  if (segments.size() > 3) {
    segments.resize(3);
  }
  return PackageId(std::move(segments));
}

PackageId parse_package(std::string_view normalized) {
  auto pkg = normalize_package(normalized);
  if (!pkg || pkg->str() != normalized) {
    throw MalformedPackage(std::string(normalized));
  }
  return *pkg;
}

std::optional<PackageId> package_of_class(std::string_view class_name) {
  auto dot = class_name.rfind('.');
  if (dot == std::string_view::npos) {
    return std::nullopt;
  }
  return normalize_package(class_name.substr(0, dot));
}

bool class_in_package(std::string_view class_name, const PackageId& pkg) {
  const auto& prefix = pkg.str();
  // The class segment must follow the package, so a bare prefix match is
  // insufficient: "com.google.adsx.Y" is not in "com.google.ads".
  return class_name.size() > prefix.size() &&
      class_name.substr(0, prefix.size()) == prefix &&
      class_name[prefix.size()] == '.';
}

std::string MethodSignature::canonical() const {
  std::string out = class_name;
  out += ": ";
  out += return_type;
  out += ' ';
  out += method_name;
  out += '(';
  for (std::size_t i = 0; i < param_types.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += param_types[i];
  }
  out += ')';
  return out;
}

MethodSignature MethodSignature::parse(std::string_view text) {
  auto fail = [&](const char* why) {
    return FormatError("signature",
                       std::string(why) + " in '" + std::string(text) + "'");
  };
  auto colon = text.find(": ");
  if (colon == std::string_view::npos || colon == 0) {
    throw fail("missing class");
  }
  MethodSignature sig;
  sig.class_name = std::string(text.substr(0, colon));
  auto rest = text.substr(colon + 2);
  auto space = rest.find(' ');
  if (space == std::string_view::npos || space == 0) {
    throw fail("missing return type");
  }
  sig.return_type = std::string(rest.substr(0, space));
  rest = rest.substr(space + 1);
  auto open = rest.find('(');
  if (open == std::string_view::npos || open == 0 || rest.back() != ')') {
    throw fail("malformed method name or parameter list");
  }
  sig.method_name = std::string(rest.substr(0, open));
  auto params = rest.substr(open + 1, rest.size() - open - 2);
  std::size_t start = 0;
  while (!params.empty()) {
    auto comma = params.find(',', start);
    auto param = params.substr(start, comma == std::string_view::npos
                                          ? std::string_view::npos
                                          : comma - start);
    if (param.empty()) {
      throw fail("empty parameter type");
    }
    sig.param_types.emplace_back(param);
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return sig;
}

AbstractBody AbstractBody::from_tokens(std::vector<std::string> tokens) {
  AbstractBody body;
  body.digest = token_digest(tokens);
  body.tokens = std::move(tokens);
  return body;
}

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Activity:
      return "activity";
    case ComponentKind::Service:
      return "service";
    case ComponentKind::Receiver:
      return "receiver";
    case ComponentKind::Provider:
      return "provider";
  }
  return "activity";
}

std::optional<ComponentKind> component_kind_from_string(std::string_view s) {
  if (s == "activity") return ComponentKind::Activity;
  if (s == "service") return ComponentKind::Service;
  if (s == "receiver") return ComponentKind::Receiver;
  if (s == "provider") return ComponentKind::Provider;
  return std::nullopt;
}

std::uint64_t AppDescriptor::total_size_bytes() const {
  return std::accumulate(
      classes.begin(), classes.end(), std::uint64_t{0},
      [](std::uint64_t acc, const ClassRecord& c) { return acc + c.size_bytes; });
}

const ClassRecord* AppDescriptor::find_class(std::string_view name) const {
  for (const auto& c : classes) {
    if (c.name == name) {
      return &c;
    }
  }
  return nullptr;
}

std::set<PackageId> AppDescriptor::packages() const {
  std::set<PackageId> out;
  for (const auto& c : classes) {
    if (auto pkg = package_of_class(c.name)) {
      out.insert(std::move(*pkg));
    }
  }
  return out;
}

Corpus::Corpus(std::vector<AppDescriptor> apps) : apps_(std::move(apps)) {
  std::sort(apps_.begin(), apps_.end(),
            [](const AppDescriptor& a, const AppDescriptor& b) {
              return a.app_id < b.app_id;
            });
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    if (!index_.emplace(apps_[i].app_id, i).second) {
      throw FormatError("app_id", "duplicate app id '" + apps_[i].app_id + "'");
    }
  }
}

const AppDescriptor* Corpus::find(std::string_view app_id) const {
  auto it = index_.find(app_id);
  return it == index_.end() ? nullptr : &apps_[it->second];
}

const AppDescriptor& Corpus::at(std::string_view app_id) const {
  if (const auto* app = find(app_id)) {
    return *app;
  }
  throw UnknownApp(std::string(app_id));
}

} // namespace commonlibs
