#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "commonlibs/harvest.h"

namespace commonlibs {

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path out = ".";
  HarvestConfig harvest;
  std::filesystem::path wordlist;    // empty: built-in list
  std::filesystem::path allow_terms; // empty: built-in terms
  std::filesystem::path apilist;     // empty: built-in list
  std::filesystem::path whitelist;
  std::filesystem::path pairs_file;
  std::filesystem::path labels;
  double threshold = 0.8;
  std::uint64_t top = 20;
  std::uint64_t sample_k = 10;
  int workers = 1;
  int verbosity = 1;
  std::vector<double> tp_grid{0.6, 0.7, 0.8, 0.9};
  std::vector<double> ta_grid{0.1, 0.2, 0.3, 0.4};

  /// Range checks only. Throws ConfigError.
  void validate() const;
};

using Setting = std::pair<std::string, std::string>;

/// Applies one `key=value` setting. Throws ConfigError for unknown keys and
/// unparsable values.
void apply_setting(RunConfig& config, std::string_view key,
                   std::string_view value);

/// `key=value` lines ('#' comments) followed by `overrides`, which therefore
/// win. The result is range-checked.
RunConfig parse_config(std::string_view file_text,
                       const std::vector<Setting>& overrides = {});

/// Every path the config references must exist. Throws ConfigError.
void validate_paths(const RunConfig& config);

/// Entry point shared by the binary and the tests. Exit status: 0 success,
/// 1 usage or configuration error, 2 data error.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

/// Shortest round-trip decimal, always with a fractional part ("1.0").
std::string format_score(double value);

} // namespace commonlibs
