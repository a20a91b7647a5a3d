"""Trade-panel relatedness indicators and bootstrap tests of their power to
predict gains and losses of comparative advantage."""

__version__ = "0.1.0"

from .panel import ExportPanel, LallConcordance, Registry, ingest_exports, ingest_lall
from .rca import (
    AntiRca,
    BinaryRca,
    ChangeMatrix,
    ContinuousRca,
    all_year_pairs,
    compute_anti_rca,
    compute_changes,
    compute_rca,
    year_pairs,
)
from .product_space import ConditionalProbMatrix, IndicatorMatrix
from .pipeline import (
    ALL_INDICATOR_IDS,
    HEADLINE_IDS,
    SPACE_FAMILY,
    compute_indicators,
)
from .bootstrap import TestResult, TestSpec, run_suite, run_test

__all__ = [
    "ALL_INDICATOR_IDS",
    "AntiRca",
    "BinaryRca",
    "ChangeMatrix",
    "ConditionalProbMatrix",
    "ContinuousRca",
    "ExportPanel",
    "HEADLINE_IDS",
    "IndicatorMatrix",
    "LallConcordance",
    "Registry",
    "SPACE_FAMILY",
    "TestResult",
    "TestSpec",
    "all_year_pairs",
    "compute_anti_rca",
    "compute_changes",
    "compute_indicators",
    "compute_rca",
    "ingest_exports",
    "ingest_lall",
    "run_suite",
    "run_test",
    "year_pairs",
]
