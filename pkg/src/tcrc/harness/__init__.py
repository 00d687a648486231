"""Experiment orchestration: runs, search, benchmarks, reports and the CLI."""

from .bench import TimingRow, benchmark, matched_config
from .experiment import (
    DEFAULT_SEEDS,
    PAPER_TAUS,
    ExperimentConfig,
    ResultRecord,
    SummaryRow,
    aggregate,
    load_dataset,
    run_experiment,
    run_single,
)
from .report import emit_report, read_records
from .search import Param, SearchResult, SearchSpace, apply_params, search

__all__ = [
    "DEFAULT_SEEDS", "PAPER_TAUS", "ExperimentConfig", "ResultRecord", "SummaryRow",
    "aggregate", "load_dataset", "run_experiment", "run_single", "emit_report", "read_records",
    "Param", "SearchResult", "SearchSpace", "apply_params", "search", "TimingRow", "benchmark",
    "matched_config",
]
