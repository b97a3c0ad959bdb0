import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("cwlm", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("cwlm")
os.environ.setdefault("CWLM_THREADS", "4")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_bloch(rng, max_norm=1.0):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * rng.uniform(0, max_norm)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance(capsys):
    """Record and print one pass/fail line for an acceptance criterion."""
    def record(k: int, ok: bool, detail: str):
        line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[k] = line
        with capsys.disabled():
            print("\n" + line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
