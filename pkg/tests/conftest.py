from contextlib import contextmanager

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = pytest.StashKey[list]()


class _CriterionLog:
    def __init__(self, lines):
        self.lines = lines

    @contextmanager
    def __call__(self, number: int, title: str):
        try:
            yield
        except BaseException:
            self._emit(number, "FAIL", title)
            raise
        self._emit(number, "PASS", title)

    def _emit(self, number, status, title):
        line = f"{status}  criterion {number}: {title}"
        self.lines.append((number, line))
        print(line)


@pytest.fixture
def criterion(request):
    """Context manager that logs one PASS/FAIL line for an acceptance criterion."""
    return _CriterionLog(request.config.stash.setdefault(_ACCEPTANCE, []))


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
