#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "commonlibs/model.h"
#include "commonlibs/similarity.h"

namespace commonlibs {

/// Parses one smali class listing. Only `.class`, `.super`, `.method` and
/// `.end method` are interpreted; other directives, labels and comments are
/// skipped. `path` is used for error positions only.
///
/// Sizes are source-text byte lengths: a method covers its `.method` line
/// through its `.end method` line, newlines included; the class covers the
/// whole text.
ClassRecord parse_smali_class(std::string_view text,
                              std::string_view path = "<input>",
                              const SdkPrefixList& sdk = {});

/// Converts a JVM type descriptor ("I", "[Ljava/lang/String;") to a type
/// name ("int", "java.lang.String[]"). Throws std::invalid_argument.
std::string type_name_from_descriptor(std::string_view descriptor);

/// Parses `Lpkg/Cls;->name(args)ret`. Throws std::invalid_argument.
MethodSignature parse_method_reference(std::string_view ref);

struct ManifestInfo {
  std::set<std::string> permissions;
  std::vector<Component> components;
};

/// `permission <name>` and `component <kind> <class>` lines; '#' comments.
ManifestInfo parse_manifest(std::string_view text,
                            std::string_view path = "manifest.txt");

/// Loads `<root>/smali/**/*.smali` plus an optional `<root>/manifest.txt`.
/// Files whose path disagrees with their class name produce a warning in
/// `warnings` (when non-null). All parse failures are aggregated into one
/// ParseError.
AppDescriptor load_app_from_smali_dir(const std::filesystem::path& root,
                                      const std::string& app_id,
                                      const SdkPrefixList& sdk = {},
                                      std::vector<std::string>* warnings =
                                          nullptr);

/// Descriptor interchange format: one JSON document per app.
std::string save_descriptor(const AppDescriptor& app);
/// Throws FormatError with the offending field path.
AppDescriptor load_descriptor(std::string_view bytes);

/// A corpus is a directory of `*.json` descriptors.
Corpus load_corpus_dir(const std::filesystem::path& dir, int workers = 1);
void save_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace commonlibs
