#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace commonlibs {

/// A normalized package name of one to three segments. Never starts with
/// android.support.
class PackageId {
 public:
  PackageId() = default;

  const std::vector<std::string>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  const std::string& str() const { return dotted_; }

  /// True when `this` equals `other` or is a proper segment-boundary prefix.
  bool is_prefix_of(const PackageId& other) const;

  friend bool operator==(const PackageId& a, const PackageId& b) {
    return a.dotted_ == b.dotted_;
  }
  friend std::strong_ordering operator<=>(const PackageId& a,
                                          const PackageId& b) {
    return a.dotted_ <=> b.dotted_;
  }

 private:
  friend std::optional<PackageId> normalize_package(std::string_view raw);
  explicit PackageId(std::vector<std::string> segments);

  std::vector<std::string> segments_;
  std::string dotted_;
};

/// Keeps the first min(3, n) segments of `raw`. Returns nullopt for names
/// under android.support. Throws MalformedPackage on empty segments.
std::optional<PackageId> normalize_package(std::string_view raw);

/// Parses a package that must already be in normal form; unlike
/// normalize_package this never truncates. Throws MalformedPackage.
PackageId parse_package(std::string_view normalized);

/// Package of a fully-qualified class name (drops the class segment).
/// nullopt for default-package classes and android.support classes.
std::optional<PackageId> package_of_class(std::string_view class_name);

bool class_in_package(std::string_view class_name, const PackageId& pkg);

struct MethodSignature {
  std::string class_name;
  std::string return_type;
  std::string method_name;
  std::vector<std::string> param_types;

  /// "Class: Ret name(P1,P2)"
  std::string canonical() const;
  static MethodSignature parse(std::string_view canonical);

  friend bool operator==(const MethodSignature&,
                         const MethodSignature&) = default;
};

struct Instruction {
  std::string opcode;
  std::optional<MethodSignature> target;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct AbstractBody {
  std::vector<std::string> tokens;
  std::uint64_t digest = 0;

  static AbstractBody from_tokens(std::vector<std::string> tokens);

  friend bool operator==(const AbstractBody&, const AbstractBody&) = default;
};

struct MethodRecord {
  MethodSignature signature;
  std::vector<Instruction> raw_body;
  AbstractBody abstract_body;
  std::uint64_t size_bytes = 0;

  friend bool operator==(const MethodRecord&, const MethodRecord&) = default;
};

struct ClassRecord {
  std::string name;
  std::optional<std::string> super_name;
  std::vector<MethodRecord> methods;
  std::uint64_t size_bytes = 0;

  friend bool operator==(const ClassRecord&, const ClassRecord&) = default;
};

enum class ComponentKind { Activity, Service, Receiver, Provider };

std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> component_kind_from_string(std::string_view s);

struct Component {
  ComponentKind kind = ComponentKind::Activity;
  std::string class_name;

  friend bool operator==(const Component&, const Component&) = default;
};

inline constexpr std::string_view kInternetPermission =
    "android.permission.INTERNET";

struct AppDescriptor {
  std::string app_id;
  std::optional<std::string> cert_id;
  std::set<std::string> permissions;
  std::vector<Component> components;
  std::vector<ClassRecord> classes;

  std::uint64_t total_size_bytes() const;
  const ClassRecord* find_class(std::string_view name) const;
  /// Distinct normalized packages of this app's classes.
  std::set<PackageId> packages() const;
  bool has_permission(std::string_view permission) const {
    return permissions.count(std::string(permission)) > 0;
  }

  friend bool operator==(const AppDescriptor&, const AppDescriptor&) = default;
};

/// Immutable set of apps ordered by app_id.
class Corpus {
 public:
  Corpus() = default;
  /// Sorts by app_id. Throws FormatError("app_id") on duplicate ids.
  explicit Corpus(std::vector<AppDescriptor> apps);

  const std::vector<AppDescriptor>& apps() const { return apps_; }
  std::size_t size() const { return apps_.size(); }
  bool empty() const { return apps_.empty(); }

  const AppDescriptor* find(std::string_view app_id) const;
  /// Throws UnknownApp.
  const AppDescriptor& at(std::string_view app_id) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.apps_ == b.apps_;
  }

 private:
  std::vector<AppDescriptor> apps_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

} // namespace commonlibs
