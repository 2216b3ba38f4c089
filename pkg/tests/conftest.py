import time

import numpy as np
import pytest

from emochat.simulator import BotSpec, SimConfig, run

# acceptance results, filled by test_acceptance and echoed in the summary
AC_LINES = {}


def default_config(profile: str = "positive", **kw) -> SimConfig:
    return SimConfig(bot=BotSpec(profile=profile), **kw)


class Runs(dict):
    """Profile -> SimResult, with wall-clock seconds per run in ``seconds``."""

    def __init__(self):
        super().__init__()
        self.seconds = {}


@pytest.fixture(scope="session")
def default_runs():
    """The three library-default runs (seed 1, 5000 ticks), one per Bot profile."""
    out = Runs()
    for p in ("positive", "negative", "neutral"):
        t0 = time.perf_counter()
        out[p] = run(default_config(p))
        out.seconds[p] = time.perf_counter() - t0
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not AC_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(AC_LINES, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(AC_LINES[key])
