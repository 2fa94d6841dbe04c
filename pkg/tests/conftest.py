import time
from pathlib import Path

import numpy as np
import pytest

HERE = Path(__file__).parent
CONFIGS = HERE / "configs"
GOLDEN = HERE / "golden"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_START = time.perf_counter()
SUITE_BUDGET = 600.0


def pytest_terminal_summary(terminalreporter):
    dt = time.perf_counter() - _START
    flag = "PASS" if dt <= SUITE_BUDGET else "FAIL"
    terminalreporter.write_line(f"CRITERION 10 (runtime): {flag}  whole suite {dt:.1f}s (<= {SUITE_BUDGET:.0f}s)")
