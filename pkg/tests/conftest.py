import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from bidarboux.corpus import build_corpus  # noqa: E402


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture(scope="session")
def factorizable(corpus):
    return [m for m in corpus if m.factorizable]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, ok = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d} {title}: {'PASS' if ok else 'FAIL'}")
