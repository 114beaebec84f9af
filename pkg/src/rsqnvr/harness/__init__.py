from .config import ExperimentConfig, load_config, parse_config
from .ingest import Ratings, ingest_ratings
from .metrics import HEADER, MetricRow, format_rows, parse_rows, read_csv, write_csv
from .runner import Case, build_case, karcher_reference, run_case, run_one

__all__ = [
    "HEADER",
    "Case",
    "ExperimentConfig",
    "MetricRow",
    "Ratings",
    "build_case",
    "format_rows",
    "ingest_ratings",
    "karcher_reference",
    "load_config",
    "parse_config",
    "parse_rows",
    "read_csv",
    "run_case",
    "run_one",
    "write_csv",
]
