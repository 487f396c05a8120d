from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dronelab.config import MissionConfig


@pytest.fixture
def cfg() -> MissionConfig:
    return MissionConfig()


@pytest.fixture
def crash_free_cfg() -> MissionConfig:
    return MissionConfig(crash_prob=0.0)


def pytest_runtest_logreport(report):
    """One visible line per acceptance criterion, pass or fail."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    label = CRITERIA.get(name)
    if label:
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {verdict}: {label}", flush=True)
