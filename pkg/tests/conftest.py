import numpy as np
import pytest

from survx.image import ImageTensor

_ACCEPTANCE_LABELS = {}
_ACCEPTANCE_RESULTS = []


def pytest_collection_modifyitems(items):
    for item in items:
        if "test_acceptance" in item.nodeid and item.function.__doc__:
            _ACCEPTANCE_LABELS[item.nodeid] = item.function.__doc__.strip().splitlines()[0]


def pytest_runtest_logreport(report):
    if report.when == "call" and report.nodeid in _ACCEPTANCE_LABELS:
        _ACCEPTANCE_RESULTS.append((_ACCEPTANCE_LABELS[report.nodeid], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label, outcome in _ACCEPTANCE_RESULTS:
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{status}: {label}")


def smooth_image(seed=0, channels=1, height=48, width=48):
    """Band-limited random image: natural-ish content for metric tests."""
    rng = np.random.default_rng(seed)
    base = rng.random((channels, height, width))
    kernel = np.ones(5) / 5.0
    for axis in (1, 2):
        base = np.apply_along_axis(lambda v: np.convolve(v, kernel, mode="same"), axis, base)
    base = (base - base.min()) / (base.max() - base.min())
    return ImageTensor(0.05 + 0.9 * base)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def gray_image():
    return smooth_image(seed=3, channels=1)


@pytest.fixture
def rgb_image():
    return smooth_image(seed=4, channels=3)
