"""Behavioral analysis pipeline: per-junction labels, confidence degrees and
categories, hot-hand detection, risk classification, statistical tests, and
summary reporting."""

from .labeling import (
    CATEGORIES,
    ConfidenceDegrees,
    HotHandRecord,
    JunctionLabel,
    categorize,
    confidence_degrees,
    hot_hand_scan,
    label_junction,
    label_session,
)
from .risk import RiskAttitude, classify_risk
from .stats import (
    TestResult,
    binom_test_geq,
    chi2_2x2,
    kruskal_wallis,
    ks_two_sample,
    mann_whitney,
)
from .report import SummaryReport, summarize

__all__ = [
    "CATEGORIES",
    "ConfidenceDegrees",
    "HotHandRecord",
    "JunctionLabel",
    "RiskAttitude",
    "SummaryReport",
    "TestResult",
    "binom_test_geq",
    "categorize",
    "chi2_2x2",
    "classify_risk",
    "confidence_degrees",
    "hot_hand_scan",
    "kruskal_wallis",
    "ks_two_sample",
    "label_junction",
    "label_session",
    "mann_whitney",
    "summarize",
]
