import os
import random

import numpy as np
import pytest

from chaosvid.keying import generate_key

_ACCEPTANCE: dict = {}


def record_criterion(number: int, title: str, passed, detail: str = "") -> None:
    """Record one part of a criterion; ``passed=None`` marks it skipped.

    A criterion checked by several tests passes only if every part passes.
    """
    if number in _ACCEPTANCE:
        _, prior, prior_detail = _ACCEPTANCE[number]
        if prior is False or passed is None:
            passed = prior if passed is None else False
        detail = "; ".join(d for d in (prior_detail, detail) if d)
    _ACCEPTANCE[number] = (title, passed, detail)


@pytest.fixture(scope="session")
def astronaut() -> np.ndarray:
    """512x512 RGB natural test image shipped with scikit-image."""
    data = pytest.importorskip("skimage.data")
    img = np.ascontiguousarray(data.astronaut(), dtype=np.uint8)
    assert img.shape == (512, 512, 3)
    return img


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def plcm_key():
    return generate_key("plcm", random.Random(7))


@pytest.fixture(scope="session")
def lasm_key():
    return generate_key("lasm", random.Random(7))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL" if passed is False else "SKIP"
        line = f"criterion {number:2d} {status}  {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
