"""MOS ingestion, significance testing, latency benchmarking, reporting."""

from .bench import latency_bench, make_bench_input
from .mos import MosAggregate, MosRecord, aggregate_mos, export_mos_csv, ingest_mos
from .report import (
    DEFAULT_ALPHA,
    build_report,
    method_distributions_csv,
    report_from_json,
    report_to_csv,
    report_to_json,
    validate_report,
)
from .stats import (
    MannWhitneyResult,
    WelchResult,
    correlate,
    mann_whitney_u,
    midranks,
    normal_sf,
    regularized_incomplete_beta,
    t_two_sided_p,
    welch_ttest,
)

__all__ = [
    "DEFAULT_ALPHA", "MannWhitneyResult", "MosAggregate", "MosRecord",
    "WelchResult", "aggregate_mos", "build_report", "correlate",
    "export_mos_csv", "ingest_mos", "latency_bench", "make_bench_input",
    "mann_whitney_u", "method_distributions_csv", "midranks", "normal_sf",
    "regularized_incomplete_beta", "report_from_json", "report_to_csv",
    "report_to_json", "t_two_sided_p", "validate_report", "welch_ttest",
]
