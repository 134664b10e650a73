#include <gtest/gtest.h>

#include "commonlibs/adlib.h"
#include "commonlibs/errors.h"
#include "commonlibs/ingest.h"
#include "commonlibs/shipped_data.h"
#include "synth.h"

namespace commonlibs {
namespace {

const AdWordlist& shipped() {
  static const AdWordlist wl = AdWordlist::from_text(shipped_ad_words());
  return wl;
}

bool flag(const char* pkg) { return keyword_flag(parse_package(pkg), shipped()); }

TEST(KeywordFlag, ExamplePackages) {
  EXPECT_TRUE(flag("com.google.ads"));
  EXPECT_TRUE(flag("com.adsdk.sdk"));
}

TEST(KeywordFlag, CommonWordsAreExcused) {
  for (const char* seg : {"shadow", "gadget", "load", "adapter", "adobe"}) {
    EXPECT_FALSE(flag((std::string("com.") + seg).c_str())) << seg;
  }
}

TEST(KeywordFlag, MoreCases) {
  EXPECT_FALSE(flag("com.mopub.mobileads")); // "lead" covers the "ad"
  EXPECT_TRUE(flag("com.inmobi.adnetwork"));
  EXPECT_TRUE(flag("com.Ads.sdk"));          // case-insensitive
  EXPECT_TRUE(flag("com.my_ad.x1"));         // letter run "ad"
  EXPECT_FALSE(flag("com.facebook.katana"));
  EXPECT_FALSE(flag("org.loader.download"));
  EXPECT_FALSE(flag("com.badge.reader"));
  // The trailing "ad" is not part of any word.
  EXPECT_TRUE(flag("com.shadowxad"));
}

TEST(KeywordFlag, AllowTermsBeatExclusionWords) {
  AdWordlist wl({"advert", "shadow"}, {"advert"});
  EXPECT_EQ(wl.exclusion_words().count("advert"), 0u);
  EXPECT_TRUE(keyword_flag(parse_package("com.advertising"), wl));
  EXPECT_FALSE(keyword_flag(parse_package("com.shadow"), wl));
}

TEST(KeywordFlag, ShortAllowTermsNeedWholeRun) {
  AdWordlist wl({"shadows", "loads"}, {"ads"});
  EXPECT_FALSE(keyword_flag(parse_package("com.shadows"), wl));
  EXPECT_TRUE(keyword_flag(parse_package("com.ads"), wl));
}

TEST(AdWordlist, FromTextDropsWordsWithoutAd) {
  const auto wl = AdWordlist::from_text("# c\nShadow\nhello\n\nload\n", "admob\n");
  EXPECT_EQ(wl.exclusion_words(), (std::set<std::string>{"load", "shadow"}));
  EXPECT_EQ(wl.allow_terms(), (std::set<std::string>{"admob"}));
}

TEST(InternetApiList, PrefixesAndSignatures) {
  const InternetApiList apis;
  EXPECT_TRUE(apis.matches({"java.net.URL", "void", "<init>", {"java.lang.String"}}));
  EXPECT_TRUE(apis.matches({"android.webkit.WebView", "void", "loadUrl",
                            {"java.lang.String"}}));
  EXPECT_FALSE(apis.matches({"android.webkit.WebViewClient", "void", "x", {}}));
  EXPECT_FALSE(apis.matches({"android.util.Log", "int", "d", {}}));

  const auto custom = InternetApiList::from_text(
      "# only one call\nandroid.net.ConnectivityManager: "
      "android.net.NetworkInfo getActiveNetworkInfo()\n");
  EXPECT_TRUE(custom.matches(MethodSignature::parse(
      "android.net.ConnectivityManager: android.net.NetworkInfo "
      "getActiveNetworkInfo()")));
  EXPECT_FALSE(custom.matches({"android.net.ConnectivityManager", "int", "x", {}}));
  EXPECT_THROW(InternetApiList::from_text("java.net\n"), ConfigError);
  EXPECT_THROW(InternetApiList::from_text(""), ConfigError);
}

TEST(InternetApiList, ShippedListLoads) {
  const auto apis = InternetApiList::from_text(shipped_internet_apis());
  EXPECT_EQ(apis.entries(), InternetApiList().entries());
}

TEST(Characteristics, PerPackage) {
  const auto corpus = testing::ad_truth_table_corpus();
  const InternetApiList apis;
  const auto full = parse_package("com.full.kit");
  EXPECT_EQ(apps_containing(corpus, full).size(), 3u);
  EXPECT_TRUE(uses_internet(full, corpus, apis, 10));
  EXPECT_TRUE(declares_component(full, corpus));
  EXPECT_TRUE(declares_view(full, corpus));

  EXPECT_FALSE(uses_internet(parse_package("com.nonet.kit"), corpus, apis, 10));
  EXPECT_FALSE(declares_component(parse_package("com.nocomp.kit"), corpus));
  EXPECT_FALSE(declares_view(parse_package("com.noview.kit"), corpus));

  EXPECT_THROW(uses_internet(parse_package("org.absent"), corpus, apis, 10),
               UnknownPackage);
  EXPECT_THROW(declares_view(parse_package("org.absent"), corpus),
               UnknownPackage);
}

TEST(Characteristics, InternetNeedsPermission) {
  auto apps = testing::ad_truth_table_corpus().apps();
  for (auto& a : apps) a.permissions.clear();
  const Corpus corpus(std::move(apps));
  EXPECT_FALSE(uses_internet(parse_package("com.full.kit"), corpus,
                             InternetApiList(), 10));
}

TEST(Characteristics, ViewThroughTwoHops) {
  // The chain runs through a class outside the package.
  ClassRecord leaf{"com.lib.ui.Leaf", "com.other.base.Mid", {}, 1};
  ClassRecord mid{"com.other.base.Mid", "android.view.View", {}, 1};
  AppDescriptor app;
  app.app_id = "x";
  app.classes = {leaf, mid};
  const Corpus corpus({app});
  EXPECT_TRUE(declares_view(parse_package("com.lib.ui"), corpus));

  // A cycle terminates.
  AppDescriptor loop;
  loop.app_id = "y";
  loop.classes = {{"com.lib.ui.A", "com.lib.ui.B", {}, 1},
                  {"com.lib.ui.B", "com.lib.ui.A", {}, 1}};
  EXPECT_FALSE(declares_view(parse_package("com.lib.ui"), Corpus({loop})));
}

TEST(DetectAdLibraries, TruthTable) {
  const auto corpus = testing::ad_truth_table_corpus();
  std::vector<PackageId> wl;
  for (const char* p : {"com.full.kit", "com.nocomp.kit", "com.nonet.kit",
                        "com.noview.kit"}) {
    wl.push_back(parse_package(p));
  }
  const auto report = detect_ad_libraries(wl, corpus, shipped(), InternetApiList());
  ASSERT_EQ(report.evidence.size(), 4u);
  EXPECT_TRUE(report.evidence[0].is_ad);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_FALSE(report.evidence[i].is_ad) << wl[i].str();
    EXPECT_FALSE(report.evidence[i].keyword_flag);
  }
  EXPECT_EQ(report.counts.all_three, 1u);
  EXPECT_EQ(report.counts.internet, 3u);
  EXPECT_EQ(report.counts.view_component, 2u);
  EXPECT_EQ(report.ad_libraries(), std::vector<PackageId>{wl[0]});
}

TEST(DetectAdLibraries, KeywordAloneSuffices) {
  const auto corpus = testing::ad_truth_table_corpus();
  const std::vector<PackageId> wl{parse_package("com.google.ads")};
  const auto report = detect_ad_libraries(wl, corpus, shipped(), InternetApiList());
  EXPECT_TRUE(report.evidence[0].is_ad);
  EXPECT_FALSE(report.evidence[0].uses_internet);
  EXPECT_EQ(format_ad_csv(report),
            "package,keyword,internet,component,view,is_ad\n"
            "com.google.ads,1,0,0,0,1\n");
}

TEST(DetectAdLibraries, ParsedFixtureApp) {
  const auto app = load_app_from_smali_dir(
      std::filesystem::path(COMMONLIBS_FIXTURE_DIR) / "apps/sample_app", "s");
  const Corpus corpus({app});
  EXPECT_TRUE(uses_internet(parse_package("com.example.net"), corpus,
                            InternetApiList(), 10));
  EXPECT_TRUE(declares_view(parse_package("com.example.ui"), corpus));
  EXPECT_TRUE(declares_component(parse_package("com.example.ui"), corpus));
  EXPECT_FALSE(uses_internet(parse_package("com.example.ui"), corpus,
                             InternetApiList(), 10));
}

} // namespace
} // namespace commonlibs
