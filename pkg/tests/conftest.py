import time
from collections import defaultdict

import pytest

from genrank.generic_rank import RankConfig
from genrank.rank_engine import FloatTol
from genrank.report import PRESET_IDS, run_preset

_outcomes: dict[int, list[bool]] = defaultdict(list)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome == "failed":
        _outcomes[crit].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_outcomes):
        status = "PASS" if all(_outcomes[crit]) else "FAIL"
        terminalreporter.write_line(f"criterion {crit:2d}: {status} ({len(_outcomes[crit])} checks)")


class _Sweeps:
    """Lazily computed preset reports, shared across the session."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._reports = {}
        self.seconds = {}

    def __getitem__(self, pid):
        if pid not in self._reports:
            start = time.perf_counter()
            self._reports[pid] = run_preset(pid, self.cfg)
            self.seconds[pid] = time.perf_counter() - start
        return self._reports[pid]

    def all(self):
        return [self[pid] for pid in PRESET_IDS]


@pytest.fixture(scope="session")
def field_sweeps():
    return _Sweeps(RankConfig())


@pytest.fixture(scope="session")
def float_sweeps():
    return _Sweeps(RankConfig(ring=FloatTol(1e-8)))
