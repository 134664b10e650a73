"""Common library harvesting over app corpora."""

from ._core import (
    ConfigError,
    Corpus,
    EmptyComparison,
    Error,
    FormatError,
    HarvestConfig,
    IoError,
    MalformedPackage,
    ParseError,
    UnknownApp,
    detect_ads,
    harvest,
    keyword_flag,
    normalize_package,
    pairwise_piggyback,
    run_cli,
    similarity_score,
    threshold_grid,
)

__all__ = [
    "ConfigError",
    "Corpus",
    "EmptyComparison",
    "Error",
    "FormatError",
    "HarvestConfig",
    "IoError",
    "MalformedPackage",
    "ParseError",
    "UnknownApp",
    "detect_ads",
    "harvest",
    "keyword_flag",
    "normalize_package",
    "pairwise_piggyback",
    "run_cli",
    "similarity_score",
    "threshold_grid",
]
