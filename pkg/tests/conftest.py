import functools
import warnings

import pytest
from mpmath import mp

from wkbtrunc.errors import ResolutionWarning
from wkbtrunc.jets import set_precision
from wkbtrunc.wkb import build_phase_table


@pytest.fixture(autouse=True)
def default_precision():
    saved = mp.dps
    set_precision(34)
    yield
    mp.dps = saved


@functools.lru_cache(maxsize=None)
def _table(a, interval, N_max, M, dps):
    saved = mp.dps
    mp.dps = dps
    try:
        with warnings.catch_warnings():
            # high orders of long tables are expected to exhaust the degree
            warnings.simplefilter("ignore", ResolutionWarning)
            return build_phase_table(a, interval, N_max, M)
    finally:
        mp.dps = saved


@pytest.fixture(scope="session")
def phase_table():
    """Cached ``phase_table(a, interval, N_max, M=64)`` at the current precision."""

    def get(a="x", interval=(1, 2), N_max=8, M=64):
        return _table(a, tuple(interval), N_max, M, mp.dps)

    return get


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
