import importlib
import re

import numpy as np
import pytest

from gausspersist import _kernels_py


def _compiled():
    try:
        return importlib.import_module("gausspersist._kernels")
    except ImportError:
        return None


COMPILED = _compiled()


@pytest.fixture(params=["python", "cython"])
def kernels(request):
    """Both kernel backends, whatever the import-time selection was."""
    if request.param == "python":
        return _kernels_py
    if COMPILED is None:
        pytest.skip("compiled extension not built")
    return COMPILED


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion at the end of the run

_CRITERION = re.compile(r"test_criterion_(\d+)([a-z]?)_(\w+)(\[[^\]]*\])?")
_outcomes: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = m.group(2) + (" " if m.group(2) else "") + m.group(3).replace("_", " ") + (m.group(4) or "")
        _outcomes.setdefault(int(m.group(1)), []).append((label, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        parts = _outcomes[n]
        ok = all(o == "passed" for _, o in parts)
        failed = [label for label, o in parts if o != "passed"]
        detail = "" if ok else "  [failed: " + "; ".join(failed) + "]"
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}{detail}")
