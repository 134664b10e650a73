from pathlib import Path

import pytest

import commonlibs

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"

LIB = """.class public Lcom/lib/net/Util;
.super Ljava/lang/Object;
.method public static get(Ljava/lang/String;)Ljava/lang/String;
    .registers 2
    new-instance v0, Ljava/net/URL;
    invoke-direct {v0, p0}, Ljava/net/URL;-><init>(Ljava/lang/String;)V
    const-string v1, "x"
    return-object v1
.end method
"""


def own_class(app: str) -> str:
    methods = "".join(
        f".method public m{i}()V\n" + "    nop\n" * (i + 1) + "    return-void\n.end method\n"
        for i in range(20)
    )
    return f".class public Lcom/{app}/main/Main;\n.super Landroid/app/Activity;\n" + methods


def make_smali_app(root: Path, app: str) -> Path:
    base = root / app
    (base / "smali/com/lib/net").mkdir(parents=True)
    (base / f"smali/com/{app}/main").mkdir(parents=True)
    (base / "smali/com/lib/net/Util.smali").write_text(LIB)
    (base / f"smali/com/{app}/main/Main.smali").write_text(own_class(app))
    (base / "manifest.txt").write_text("permission android.permission.INTERNET\n")
    return base


def test_normalize_package():
    assert commonlibs.normalize_package("com.google.ads.internal") == "com.google.ads"
    assert commonlibs.normalize_package("android.support.v4.app") is None
    with pytest.raises(commonlibs.MalformedPackage):
        commonlibs.normalize_package("com..x")


def test_similarity_score():
    assert commonlibs.similarity_score(8, 1, 1, 2) == pytest.approx(0.8)
    assert commonlibs.similarity_score(0, 0, 0, 5) == 0.0
    with pytest.raises(commonlibs.EmptyComparison):
        commonlibs.similarity_score(0, 0, 0, 0)


def test_keyword_flag():
    assert commonlibs.keyword_flag("com.google.ads")
    assert commonlibs.keyword_flag("com.adsdk.sdk")
    for word in ["shadow", "gadget", "load", "adapter", "adobe"]:
        assert not commonlibs.keyword_flag("com." + word)


def test_harvest_small_corpus(tmp_path):
    roots = [make_smali_app(tmp_path / "apps", f"app{i}") for i in range(4)]
    corpus = commonlibs.Corpus.from_smali_dirs(roots)
    assert len(corpus) == 4
    assert corpus.package_similarity("app0", "app1", "com.lib.net") == 1.0
    assert corpus.app_similarity("app0", "app1") < 0.1

    config = commonlibs.HarvestConfig(min_apps=2)
    whitelist, report, csv = commonlibs.harvest(corpus, config)
    assert whitelist == ["com.lib.net"]
    assert report["final_candidates"] == 1
    assert csv.startswith("package,n_shared_apps")

    ads = commonlibs.detect_ads(corpus, whitelist)
    assert ads[0]["internet"] and not ads[0]["is_ad"]

    grid = commonlibs.threshold_grid(corpus, [0.9], [0.1, 0.2], config)
    assert grid[(0.9, 0.1)] == ["com.lib.net"]

    rows = commonlibs.pairwise_piggyback(corpus, [("app0", "app1")], whitelist)
    assert rows[0]["label_full"] == "distinct"
    assert rows[0]["sim_excluding"] == 0.0


def test_config_validation():
    with pytest.raises(commonlibs.ConfigError):
        commonlibs.HarvestConfig(t_a=1.5)


def test_cli_ingest_and_simpair(tmp_path):
    code, _, err = commonlibs.run_cli(
        ["ingest", "--corpus", str(FIXTURES / "apps"), "--out", str(tmp_path / "desc")]
    )
    assert code == 0, err
    corpus = commonlibs.Corpus.load(tmp_path / "desc")
    assert corpus.app_ids == ["sample_app"]
    code, out, _ = commonlibs.run_cli(
        ["simpair", "--corpus", str(tmp_path / "desc"), "--a", "sample_app", "--b", "sample_app"]
    )
    assert (code, out) == (0, "1.0\n")
    assert commonlibs.run_cli(["frobnicate"])[0] == 1
