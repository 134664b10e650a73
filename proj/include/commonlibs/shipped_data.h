#pragma once

#include <string_view>

namespace commonlibs {

// Contents of data/ad_words.txt: dictionary words containing "ad"
// (Webster's Second International, public domain).
std::string_view shipped_ad_words();

// Contents of data/internet_apis.txt.
std::string_view shipped_internet_apis();

} // namespace commonlibs
