import numpy as np
import pytest

from evacoustic import kernels
from evacoustic.audio_io import AudioClip

FS = 192_000

_KERNEL_NAMES = ("block_mean_square", "one_pole", "vote_activity", "true_runs")
_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    if request.param == "numba" and not kernels.HAS_NUMBA:
        pytest.skip("numba not installed")
    suffix = "_nb" if request.param == "numba" else "_np"
    for name in _KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(kernels, f"_{name}{suffix}"))
    return request.param


def tone(freq, seconds=1.0, fs=FS, amplitude=1.0, phase=0.0):
    t = np.arange(int(round(seconds * fs))) / fs
    return AudioClip(amplitude * np.sin(2 * np.pi * freq * t + phase), fs)


@pytest.fixture
def criterion(request):
    """Record an acceptance criterion's outcome for the terminal summary."""
    entry = {"name": request.node.name, "label": None, "detail": ""}

    def record(label, detail=""):
        entry["label"] = label
        entry["detail"] = detail

    yield record
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    _ACCEPTANCE_LINES.append((entry["label"] or entry["name"], passed, entry["detail"]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE_LINES:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {label}" + (f"  ({detail})" if detail else ""))
