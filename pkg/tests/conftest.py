import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hdswap.measure import run, simulate  # noqa: E402
from hdswap.protocol import ProtocolConfig  # noqa: E402


@lru_cache(maxsize=None)
def evolved(**kw):
    return simulate(ProtocolConfig(**kw))


@lru_cache(maxsize=None)
def _report(items):
    cfg = ProtocolConfig(**dict(items))
    shared = {k: v for k, v in items if k not in ("detector_model", "herald_assignment")}
    return run(cfg, evolved(**shared))


def report(**kw):
    return _report(tuple(sorted(kw.items())))


@pytest.fixture(scope="session")
def d4():
    return evolved(dimension=4)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
