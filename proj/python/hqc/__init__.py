"""Hierarchical clustering of qualitative values by maximum mean discrepancy."""

from ._hqc import (
    ConfigError,
    DataError,
    Dataset,
    HqcError,
    LinkageRecord,
    ParseError,
    ValueGroup,
    __version__,
    ad_statistic,
    bootstrap_pvalue,
    cut_linkage,
    embed_dissimilarity,
    group_by_value,
    jaccard_distance,
    ks_statistic,
    load_csv,
    load_csv_text,
    mmd2_unbiased,
    mmd_distance,
    overlap_dissimilarity,
    parse_linkage_csv,
    run_hqc,
    run_pipeline,
    standardize,
    write_linkage_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
